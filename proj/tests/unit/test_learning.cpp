#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "hdsim/learning.hpp"
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

std::vector<double> random_simplex(Rng& rng, std::size_t n = 10) {
  std::vector<double> p(n);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (auto& v : p) v = u(rng);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= s;
  return p;
}

AgentConfig small_config(int state_dim = 4) {
  AgentConfig c;
  c.state_dim = state_dim;
  c.hidden = {8, 8};
  c.batch_size = 4;
  c.capacity = 64;
  return c;
}

Transition random_transition(Rng& rng, int dim) {
  Transition t;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < dim; ++k) {
    t.state.push_back(n(rng));
    t.next_state.push_back(n(rng));
  }
  t.action = static_cast<int>(rng() % 10);
  t.reward = n(rng);
  t.done = rng() % 5 == 0;
  return t;
}

}  // namespace

TEST_CASE("uniform filter is the identity") {
  Rng rng(1);
  const auto f = ApdFilter::uniform();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_simplex(rng);
    const auto q = apply_filter(p, f);
    for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(q[k] - p[k]) <= 1e-12);
  }
}

TEST_CASE("one-hot filter concentrates but keeps the floor") {
  ApdFilter f;
  f.weights.fill(0.0);
  f.weights[6] = 1.0;
  f.epsilon = 1e-3;
  const std::vector<double> p(10, 0.1);
  const auto q = apply_filter(p, f);
  // direct arithmetic: 0.1 * 1 and 0.1 * 1e-3 over their sum
  const double norm = 0.1 * 1.0 + 9 * 0.1 * 1e-3;
  CHECK(q[6] == doctest::Approx(0.1 / norm));
  for (std::size_t k = 0; k < 10; ++k) {
    if (k != 6) CHECK(q[k] == doctest::Approx(0.1 * 1e-3 / norm));
    CHECK(q[k] >= f.epsilon / 10.0 * 0.1 / norm);
  }
}

TEST_CASE("filter on a uniform policy returns the weights") {
  ApdFilter f;
  for (std::size_t k = 0; k < 10; ++k) f.weights[k] = static_cast<double>(10 - k);
  const std::vector<double> p(10, 0.1);
  const auto q = apply_filter(p, f);
  for (std::size_t k = 0; k < 10; ++k) CHECK(q[k] == doctest::Approx((10.0 - k) / 55.0));
  CHECK_THROWS_AS((void)apply_filter(std::vector<double>(3, 1.0 / 3), f), std::invalid_argument);
}

TEST_CASE("filter weights from choice counts") {
  std::array<double, 10> none{};
  const auto u = ApdFilter::from_counts(none);
  for (double w : u.weights) CHECK(w == doctest::Approx(0.1));

  std::array<double, 10> fives{};
  fives[4] = 40;
  const auto f = ApdFilter::from_counts(fives);
  CHECK(f.weights[4] == doctest::Approx(41.0 / 50.0));
  CHECK(f.weights[0] == doctest::Approx(1.0 / 50.0));

  std::array<double, 10> c{10, 10, 20, 0, 0, 0, 0, 0, 0, 0};
  const auto g = ApdFilter::from_counts(c);
  CHECK(g.weights[2] / g.weights[0] == doctest::Approx(21.0 / 11.0));
  CHECK(std::accumulate(g.weights.begin(), g.weights.end(), 0.0) == doctest::Approx(1.0));
  std::array<double, 10> neg{};
  neg[0] = -1.0;
  CHECK_THROWS_AS((void)ApdFilter::from_counts(neg), std::invalid_argument);
}

TEST_CASE("filtered policy domains") {
  std::vector<double> z{0.3, -1.0, 2.0, 0.0, 0.5, 0.1, -0.2, 1.0, 0.0, 0.7};
  const auto plain = filtered_policy(z, nullptr);
  CHECK(std::accumulate(plain.begin(), plain.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  ApdFilter f = ApdFilter::uniform();
  f.weights[2] = 0.5;
  f.domain = FilterDomain::Logit;
  const auto logit = filtered_policy(z, &f);
  // oracle: softmax of w .* z
  double s = 0.0;
  std::vector<double> ref(10);
  for (std::size_t k = 0; k < 10; ++k) s += ref[k] = std::exp(f.weights[k] * z[k]);
  for (std::size_t k = 0; k < 10; ++k) CHECK(logit[k] == doctest::Approx(ref[k] / s));
}

TEST_CASE("state encoders") {
  std::vector<ObservedSignal> sig{{1, Dbm{-99}, StrategyIndex{1}}, {2, Dbm{-98.5}, StrategyIndex{1}},
                                  {3, Dbm{-50}, StrategyIndex{10}}};
  const auto a = encode_attacker_state(sig);
  CHECK(a == std::vector<double>{2, 0, 0, 0, 0, 0, 0, 0, 0, 1});

  GridMap g(2, 2, 10.0, 2);
  g.add_scan(0);
  g.add_scan(0);
  g.add_scan(3);
  CHECK(encode_defender_state(g) == std::vector<double>{0.25, 1.0, 0.0, 0.0, 0.5});
}

TEST_CASE("critic gradient matches finite differences") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp critic({4, 8, 8, 1}, rng, Mlp::Options{true, 0.0, 0.01, 1e-5});
    const MatrixXd x = random_matrix(4, 6, rng);
    std::vector<double> y(6), w(6);
    for (auto& v : y) v = std::normal_distribution<double>()(rng);
    for (auto& v : w) v = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
    VectorXd grad;
    std::vector<double> td;
    (void)critic_loss_and_grad(critic, x, y, w, &grad, &td);
    const auto f = [&](const VectorXd& p) {
      Mlp c = critic;
      c.mutable_params() = p;
      return critic_loss_and_grad(c, x, y, w, nullptr, nullptr);
    };
    CHECK(oracle::relative_error(grad, oracle::numeric_gradient(f, critic.params())) < 1e-4);
    const MatrixXd v = critic.forward(x);
    for (int b = 0; b < 6; ++b) CHECK(td[static_cast<std::size_t>(b)] == doctest::Approx(y[b] - v(0, b)));
  }
}

TEST_CASE("actor gradient matches finite differences") {
  Rng rng(12);
  ApdFilter prob = ApdFilter::from_counts(std::array<double, 10>{5, 0, 3, 0, 9, 1, 0, 0, 2, 4});
  ApdFilter logit = prob;
  logit.domain = FilterDomain::Logit;
  for (int trial = 0; trial < 3; ++trial) {
    const MatrixXd x = random_matrix(4, 5, rng);
    std::vector<int> a(5);
    std::vector<double> adv(5), w(5);
    for (auto& v : a) v = static_cast<int>(rng() % 4);
    for (auto& v : adv) v = std::normal_distribution<double>()(rng);
    for (auto& v : w) v = std::uniform_real_distribution<double>(0.2, 1.0)(rng);

    const auto check = [&](const Mlp& actor, const ApdFilter* filter, double entropy) {
      VectorXd grad;
      (void)actor_loss_and_grad(actor, x, a, adv, w, filter, entropy, &grad);
      const auto f = [&](const VectorXd& p) {
        Mlp m = actor;
        m.mutable_params() = p;
        return actor_loss_and_grad(m, x, a, adv, w, filter, entropy, nullptr);
      };
      return oracle::relative_error(grad, oracle::numeric_gradient(f, actor.params()));
    };
    Mlp mini({4, 8, 8, 4}, rng, Mlp::Options{true, 0.0, 0.01, 1e-5});
    CHECK(check(mini, nullptr, 0.0) < 1e-4);
    CHECK(check(mini, nullptr, 0.05) < 1e-4);
    Mlp wide({4, 8, 8, 10}, rng, Mlp::Options{true, 0.0, 0.01, 1e-5});
    CHECK(check(wide, &prob, 0.0) < 1e-4);
    CHECK(check(wide, &prob, 0.05) < 1e-4);
    CHECK(check(wide, &logit, 0.05) < 1e-4);
  }
}

TEST_CASE("zero advantage gives a zero actor gradient") {
  Rng rng(13);
  Mlp actor({4, 8, 10}, rng);
  const MatrixXd x = random_matrix(4, 3, rng);
  VectorXd grad;
  (void)actor_loss_and_grad(actor, x, std::vector<int>{1, 2, 3}, std::vector<double>(3, 0.0),
                            std::vector<double>(3, 1.0), nullptr, 0.0, &grad);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("critic target is the reward on terminal steps") {
  for (bool done : {true, false}) {
    Rng rng(14);
    AgentConfig c = small_config();
    c.batch_size = 1;
    ActorCriticAgent agent(c, rng);
    agent.mutable_critic().zero_output_layer();
    agent.mutable_critic().mutable_params().tail(1)[0] = 0.5;  // V = 0.5 everywhere
    agent.remember(Transition{{1, 2, 3, 4}, 0, 1.0, {4, 3, 2, 1}, done});
    REQUIRE(agent.train_step(rng).has_value());
    // priority = |TD| + eps with TD = r + gamma V(s') [not terminal] - V(s)
    const double td = done ? 1.0 - 0.5 : 1.0 + 0.99 * 0.5 - 0.5;
    CHECK(agent.memory().priority(0) == doctest::Approx(td + c.priority_eps).epsilon(1e-12));
  }
}

TEST_CASE("training waits for a full batch") {
  Rng rng(15);
  ActorCriticAgent agent(small_config(), rng);
  for (int k = 0; k < 3; ++k) {
    agent.remember(random_transition(rng, 4));
    CHECK_FALSE(agent.train_step(rng).has_value());
  }
  agent.remember(random_transition(rng, 4));
  CHECK(agent.train_step(rng).has_value());
  CHECK_THROWS_AS(agent.remember(random_transition(rng, 3)), std::invalid_argument);
}

TEST_CASE("learning-rate decay and beta annealing") {
  Rng rng(16);
  AgentConfig c = small_config();
  c.beta_anneal_episodes = 10;
  ActorCriticAgent agent(c, rng);
  CHECK(agent.learning_rate() == 0.0005);
  CHECK(agent.beta() == doctest::Approx(0.4));
  for (int e = 1; e <= 100; ++e) {
    agent.end_episode();
    CHECK(agent.learning_rate() == doctest::Approx(0.0005 * std::pow(0.9, e / 20)).epsilon(1e-12));
  }
  CHECK(agent.beta() == 1.0);
}

TEST_CASE("one-hot filter without a floor always picks its action") {
  Rng rng(17);
  ApdFilter f;
  f.weights.fill(0.0);
  f.weights[6] = 1.0;
  f.epsilon = 0.0;
  ActorCriticAgent agent(small_config(), rng, f);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> s{std::normal_distribution<double>()(rng), 0.0, 1.0, -1.0};
    CHECK(agent.act(s, rng) == StrategyIndex{7});
  }
}

TEST_CASE("evaluation mode takes the argmax") {
  Rng rng(18);
  ActorCriticAgent agent(small_config(), rng);
  const std::vector<double> s{0.5, -0.2, 0.1, 0.9};
  const auto p = agent.probs(s);
  const auto best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) + 1;
  CHECK(agent.act(s, rng, true) == StrategyIndex{best});
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse CDF sampling") {
  Rng rng(19);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto p = random_simplex(rng);
    const double q = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    // CDF walk oracle
    int expect = 10;
    double acc = 0.0;
    for (int k = 0; k < 10; ++k) {
      acc += p[static_cast<std::size_t>(k)];
      if (q < acc) {
        expect = k + 1;
        break;
      }
    }
    CHECK(ActorCriticAgent::sample_index(p, q).value() == expect);
  }
  const std::vector<double> tail{0.5, 0.5, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(ActorCriticAgent::sample_index(tail, 0.9999999999999999).value() == 2);
}

TEST_CASE("identical seeds train identical parameters") {
  const auto run = [] {
    Rng rng(77);
    ApdFilter f = ApdFilter::from_counts(std::array<double, 10>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    ActorCriticAgent agent(small_config(), rng, f);
    for (int k = 0; k < 60; ++k) {
      agent.remember(random_transition(rng, 4));
      (void)agent.train_step(rng);
      if (k % 10 == 9) agent.end_episode();
    }
    return std::make_pair(agent.actor().params(), agent.critic().params());
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("snapshot round trip") {
  Rng rng(20);
  ApdFilter f = ApdFilter::from_counts(std::array<double, 10>{3, 0, 0, 0, 1, 0, 0, 0, 0, 0});
  f.domain = FilterDomain::Logit;
  ActorCriticAgent agent(small_config(), rng, f);
  for (int k = 0; k < 10; ++k) {
    agent.remember(random_transition(rng, 4));
    (void)agent.train_step(rng);
  }
  for (int e = 0; e < 20; ++e) agent.end_episode();
  std::stringstream ss;
  agent.save(ss);

  Rng other(99);
  ActorCriticAgent copy(small_config(), other);
  copy.load(ss);
  CHECK(copy.actor().params() == agent.actor().params());
  CHECK(copy.critic().params() == agent.critic().params());
  CHECK(copy.learning_rate() == agent.learning_rate());
  CHECK(copy.episodes() == 20);
  REQUIRE(copy.filter().has_value());
  CHECK(copy.filter()->weights == f.weights);
  CHECK(copy.filter()->domain == FilterDomain::Logit);

  std::stringstream again;
  agent.save(again);
  AgentConfig wider = small_config();
  wider.hidden = {8, 16};
  ActorCriticAgent mismatch(wider, other);
  CHECK_THROWS_AS(mismatch.load(again), std::runtime_error);
  std::stringstream junk("not a snapshot");
  CHECK_THROWS_AS(copy.load(junk), std::runtime_error);
}
