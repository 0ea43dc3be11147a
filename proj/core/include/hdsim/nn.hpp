#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hdsim/fleet.hpp"

namespace hdsim {

/// Fully connected network on one flat parameter vector. Every hidden layer
/// is Linear -> LayerNorm -> LeakyReLU -> Dropout; the output layer is linear.
/// Batches are stored column-wise (features x batch).
class Mlp {
 public:
  struct Options {
    bool layer_norm = true;
    double dropout = 0.01;
    double leaky_slope = 0.01;
    double norm_eps = 1e-5;
  };

  /// Intermediate values from forward_train needed by backward.
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to each linear layer
    std::vector<Eigen::MatrixXd> pre;     // linear outputs (hidden layers)
    std::vector<Eigen::MatrixXd> xhat;    // normalized pre-activations
    std::vector<Eigen::RowVectorXd> inv_std;
    std::vector<Eigen::MatrixXd> normed;  // after gain/bias
    std::vector<Eigen::MatrixXd> mask;    // dropout scale (empty when off)
  };

  Mlp() = default;
  /// Xavier-normal weights, zero biases, unit gains.
  Mlp(std::vector<int> sizes, Rng& rng, Options options);
  Mlp(std::vector<int> sizes, Rng& rng) : Mlp(std::move(sizes), rng, Options{}) {}

  [[nodiscard]] const std::vector<int>& sizes() const { return sizes_; }
  [[nodiscard]] int input_size() const { return sizes_.front(); }
  [[nodiscard]] int output_size() const { return sizes_.back(); }
  [[nodiscard]] const Options& options() const { return options_; }
  [[nodiscard]] Eigen::Index parameter_count() const { return params_.size(); }
  [[nodiscard]] const Eigen::VectorXd& params() const { return params_; }
  [[nodiscard]] Eigen::VectorXd& mutable_params() { return params_; }

  /// Inference pass (no dropout). Throws std::invalid_argument on a row mismatch.
  [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  /// Training pass; dropout drawn from rng when given.
  [[nodiscard]] Eigen::MatrixXd forward_train(const Eigen::MatrixXd& x, Cache& cache, Rng* rng) const;
  /// Parameter gradient of sum(grad_out .* output).
  [[nodiscard]] Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& grad_out) const;

  /// Zeroes the output layer's weights and bias.
  void zero_output_layer();

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    Eigen::Index w = 0;  // offsets into params_
    Eigen::Index b = 0;
    Eigen::Index gain = -1;
    Eigen::Index bias = -1;
  };

  [[nodiscard]] Eigen::MatrixXd run(const Eigen::MatrixXd& x, Cache* cache, Rng* rng) const;

  std::vector<int> sizes_;
  Options options_{};
  std::vector<Layer> layers_;
  Eigen::VectorXd params_;
};

/// Column-wise softmax.
[[nodiscard]] Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

/// Scales g in place so its norm is at most cap; returns the norm before clipping.
double clip_global_norm(Eigen::VectorXd& g, double cap);

class Adam {
 public:
  Adam() = default;
  explicit Adam(Eigen::Index n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
  [[nodiscard]] long steps() const { return t_; }

 private:
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
};

}  // namespace hdsim
