#include <cmath>

#include "doctest.h"
#include "hdsim/nn.hpp"
#include "oracles.hpp"

using namespace hdsim;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Gradient of sum(G .* net(x)) by backprop vs central differences.
double backprop_error(Mlp net, const MatrixXd& x, const MatrixXd& g, std::uint64_t dropout_seed) {
  Mlp::Cache cache;
  Rng r0(dropout_seed);
  (void)net.forward_train(x, cache, dropout_seed ? &r0 : nullptr);
  const VectorXd analytic = net.backward(cache, g);
  const auto f = [&](const VectorXd& p) {
    net.mutable_params() = p;
    Mlp::Cache c;
    Rng r(dropout_seed);
    return (g.array() * net.forward_train(x, c, dropout_seed ? &r : nullptr).array()).sum();
  };
  const VectorXd numeric = oracle::numeric_gradient(f, net.params());
  return oracle::relative_error(analytic, numeric);
}

}  // namespace

TEST_CASE("parameter layout") {
  Rng rng(1);
  Mlp net({4, 8, 8, 4}, rng);
  // weights + biases + norm gain/bias on the two hidden layers
  CHECK(net.parameter_count() == (4 * 8 + 8 + 16) + (8 * 8 + 8 + 16) + (8 * 4 + 4));
  Mlp plain({4, 8, 4}, rng, Mlp::Options{false, 0.0, 0.01, 1e-5});
  CHECK(plain.parameter_count() == 4 * 8 + 8 + 8 * 4 + 4);
  CHECK_THROWS_AS(Mlp({4}, rng), std::invalid_argument);
  CHECK_THROWS_AS(Mlp({4, 0, 2}, rng), std::invalid_argument);
  CHECK_THROWS_AS((void)net.forward(MatrixXd::Zero(3, 1)), std::invalid_argument);
}

TEST_CASE("initial weights have the fan-scaled variance") {
  Rng rng(2);
  Mlp net({200, 300, 1}, rng, Mlp::Options{false, 0.0, 0.01, 1e-5});
  const VectorXd w = net.params().head(200 * 300);
  const double var = w.array().square().mean() - std::pow(w.mean(), 2);
  CHECK(var == doctest::Approx(2.0 / 500.0).epsilon(0.03));
  CHECK(std::abs(w.mean()) < 1e-3);
}

TEST_CASE("zeroed head gives a uniform policy") {
  Rng rng(3);
  Mlp net({6, 16, 10}, rng);
  net.zero_output_layer();
  const MatrixXd p = softmax_columns(net.forward(random_matrix(6, 5, rng)));
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p.data()[i] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("softmax sums to one and is monotone in its own logit") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    MatrixXd z = 5.0 * random_matrix(10, 3, rng);
    const MatrixXd p = softmax_columns(z);
    for (Eigen::Index c = 0; c < 3; ++c) CHECK(std::abs(p.col(c).sum() - 1.0) < 1e-9);
    const auto k = static_cast<Eigen::Index>(rng() % 10);
    z(k, 0) += 0.1;
    CHECK(softmax_columns(z)(k, 0) > p(k, 0));
  }
}

TEST_CASE("inference ignores dropout and is deterministic") {
  Rng rng(5);
  Mlp net({4, 8, 8, 4}, rng, Mlp::Options{true, 0.5, 0.01, 1e-5});
  const MatrixXd x = random_matrix(4, 7, rng);
  CHECK(net.forward(x) == net.forward(x));
  Mlp::Cache cache;
  CHECK(net.forward_train(x, cache, nullptr) == net.forward(x));
  Rng d(9);
  CHECK(net.forward_train(x, cache, &d) != net.forward(x));
}

TEST_CASE("backprop matches finite differences on a miniature network") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd x = random_matrix(4, 5, rng);
    const MatrixXd g = random_matrix(4, 5, rng);
    Mlp normed({4, 8, 8, 4}, rng);
    CHECK(backprop_error(normed, x, g, 0) < 1e-4);
    Mlp plain({4, 8, 8, 4}, rng, Mlp::Options{false, 0.0, 0.01, 1e-5});
    CHECK(backprop_error(plain, x, g, 0) < 1e-4);
    Mlp dropped({4, 8, 8, 4}, rng, Mlp::Options{true, 0.2, 0.01, 1e-5});
    CHECK(backprop_error(dropped, x, g, 1234 + static_cast<std::uint64_t>(trial)) < 1e-4);
  }
}

TEST_CASE("global norm clipping") {
  VectorXd g(2);
  g << 3.0, 4.0;
  CHECK(clip_global_norm(g, 1.0) == 5.0);
  CHECK(g.norm() == doctest::Approx(1.0));
  CHECK(g[0] == doctest::Approx(0.6));
  VectorXd small(2);
  small << 0.1, 0.1;
  clip_global_norm(small, 1.0);
  CHECK(small[0] == 0.1);
}

TEST_CASE("adam first step moves each coordinate by lr against its gradient sign") {
  Adam opt(3);
  VectorXd p = VectorXd::Zero(3);
  VectorXd g(3);
  g << 2.0, -0.5, 0.0;
  opt.step(p, g, 0.01);
  CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(p[2] == 0.0);
  CHECK(opt.steps() == 1);
  CHECK_THROWS_AS(opt.step(p, VectorXd::Zero(2), 0.01), std::invalid_argument);
}

TEST_CASE("adam minimizes a quadratic") {
  Adam opt(2);
  VectorXd p(2);
  p << 3.0, -2.0;
  for (int k = 0; k < 3000; ++k) {
    const VectorXd grad = 2.0 * p;
    opt.step(p, grad, 0.01);
  }
  CHECK(p.norm() < 1e-2);
}
