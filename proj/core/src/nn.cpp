#include "hdsim/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hdsim {

using Eigen::Index;
using Eigen::MatrixXd;

Mlp::Mlp(std::vector<int> sizes, Rng& rng, Options options) : sizes_(std::move(sizes)), options_(options) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  if (options_.dropout < 0.0 || options_.dropout >= 1.0) throw std::invalid_argument("Mlp: dropout must lie in [0,1)");

  Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Layer layer;
    layer.in = sizes_[l];
    layer.out = sizes_[l + 1];
    layer.w = offset;
    offset += static_cast<Index>(layer.in) * layer.out;
    layer.b = offset;
    offset += layer.out;
    const bool hidden = l + 2 < sizes_.size();
    if (hidden && options_.layer_norm) {
      layer.gain = offset;
      offset += layer.out;
      layer.bias = offset;
      offset += layer.out;
    }
    layers_.push_back(layer);
  }

  params_ = Eigen::VectorXd::Zero(offset);
  for (const auto& layer : layers_) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / (layer.in + layer.out)));
    for (Index k = 0; k < static_cast<Index>(layer.in) * layer.out; ++k) params_[layer.w + k] = normal(rng);
    if (layer.gain >= 0) params_.segment(layer.gain, layer.out).setOnes();
  }
}

MatrixXd Mlp::forward(const MatrixXd& x) const { return run(x, nullptr, nullptr); }

MatrixXd Mlp::forward_train(const MatrixXd& x, Cache& cache, Rng* rng) const { return run(x, &cache, rng); }

MatrixXd Mlp::run(const MatrixXd& x, Cache* cache, Rng* rng) const {
  if (x.rows() != input_size()) {
    throw std::invalid_argument("Mlp: expected input of size " + std::to_string(input_size()) + ", got " +
                                std::to_string(x.rows()));
  }
  if (cache) *cache = Cache{};
  MatrixXd h = x;
  const Index batch = x.cols();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const Eigen::Map<const MatrixXd> w(params_.data() + layer.w, layer.out, layer.in);
    const Eigen::Map<const Eigen::VectorXd> b(params_.data() + layer.b, layer.out);
    if (cache) cache->inputs.push_back(h);
    MatrixXd z = w * h;
    z.colwise() += b;
    if (l + 1 == layers_.size()) return z;

    if (cache) cache->pre.push_back(z);
    if (layer.gain >= 0) {
      const Eigen::RowVectorXd mean = z.colwise().mean();
      MatrixXd centered = z.rowwise() - mean;
      const Eigen::RowVectorXd var = centered.array().square().colwise().mean();
      const Eigen::RowVectorXd inv_std = (var.array() + options_.norm_eps).rsqrt();
      MatrixXd xhat = centered.array().rowwise() * inv_std.array();
      const Eigen::Map<const Eigen::VectorXd> gain(params_.data() + layer.gain, layer.out);
      const Eigen::Map<const Eigen::VectorXd> bias(params_.data() + layer.bias, layer.out);
      z = (xhat.array().colwise() * gain.array()).colwise() + bias.array();
      if (cache) {
        cache->xhat.push_back(std::move(xhat));
        cache->inv_std.push_back(inv_std);
      }
    } else if (cache) {
      cache->xhat.emplace_back();
      cache->inv_std.emplace_back();
    }
    if (cache) cache->normed.push_back(z);

    h = z.unaryExpr([s = options_.leaky_slope](double v) { return v > 0.0 ? v : s * v; });

    if (rng && options_.dropout > 0.0) {
      std::bernoulli_distribution keep(1.0 - options_.dropout);
      MatrixXd mask(layer.out, batch);
      const double scale = 1.0 / (1.0 - options_.dropout);
      for (Index c = 0; c < batch; ++c) {
        for (Index r = 0; r < layer.out; ++r) mask(r, c) = keep(*rng) ? scale : 0.0;
      }
      h.array() *= mask.array();
      if (cache) cache->mask.push_back(std::move(mask));
    } else if (cache) {
      cache->mask.emplace_back();
    }
  }
  return h;
}

Eigen::VectorXd Mlp::backward(const Cache& cache, const MatrixXd& grad_out) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  MatrixXd delta = grad_out;  // d loss / d z of the current linear layer
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    if (l + 1 < layers_.size()) {
      // delta currently holds d/d(activation output); walk back to the linear output.
      if (cache.mask[l].size() != 0) delta.array() *= cache.mask[l].array();
      const auto& normed = cache.normed[l];
      delta = delta.binaryExpr(normed, [s = options_.leaky_slope](double g, double v) { return v > 0.0 ? g : s * g; });
      if (layer.gain >= 0) {
        const auto& xhat = cache.xhat[l];
        const Eigen::Map<const Eigen::VectorXd> gain(params_.data() + layer.gain, layer.out);
        grad.segment(layer.gain, layer.out) += (delta.array() * xhat.array()).rowwise().sum().matrix();
        grad.segment(layer.bias, layer.out) += delta.rowwise().sum();
        const MatrixXd dxhat = delta.array().colwise() * gain.array();
        const double n = layer.out;
        const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
        const Eigen::RowVectorXd sum_dx = (dxhat.array() * xhat.array()).colwise().sum();
        MatrixXd dz = (n * dxhat.array()).matrix();
        dz.rowwise() -= sum_d;
        dz.array() -= xhat.array().rowwise() * sum_dx.array();
        dz.array().rowwise() *= (cache.inv_std[l].array() / n);
        delta = std::move(dz);
      }
    }
    const auto& input = cache.inputs[l];
    Eigen::Map<MatrixXd> gw(grad.data() + layer.w, layer.out, layer.in);
    gw.noalias() += delta * input.transpose();
    grad.segment(layer.b, layer.out) += delta.rowwise().sum();
    if (l > 0) {
      const Eigen::Map<const MatrixXd> w(params_.data() + layer.w, layer.out, layer.in);
      delta = w.transpose() * delta;
    }
  }
  return grad;
}

void Mlp::zero_output_layer() {
  const auto& layer = layers_.back();
  params_.segment(layer.w, static_cast<Index>(layer.in) * layer.out).setZero();
  params_.segment(layer.b, layer.out).setZero();
}

MatrixXd softmax_columns(const MatrixXd& logits) {
  MatrixXd out = logits.rowwise() - logits.colwise().maxCoeff();
  out = out.array().exp();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

double clip_global_norm(Eigen::VectorXd& g, double cap) {
  const double norm = g.norm();
  if (cap > 0.0 && norm > cap) g *= cap / norm;
  return norm;
}

Adam::Adam(Index n, double beta1, double beta2, double eps)
    : m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (grad.size() != params.size() || m_.size() != params.size()) {
    throw std::invalid_argument("Adam: parameter and gradient sizes differ");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace hdsim
