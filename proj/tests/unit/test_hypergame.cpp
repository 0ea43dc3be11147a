#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hdsim/hypergame.hpp"
#include "json.hpp"

using namespace hdsim;

namespace {

double sum(const auto& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ObservedSignal seen(int id, double dbm) {
  return ObservedSignal{id, Dbm{dbm}, classify_received(Dbm{dbm}, default_range_table())};
}

// Direct evaluation of the hybrid expected utility for a reference.
double heu_oracle(const std::vector<double>& s, const std::vector<double>& u, double g) {
  double eu = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) eu += s[j] * u[j];
  std::size_t w = 0;
  for (std::size_t j = 1; j < u.size(); ++j) {
    if (u[j] < u[w]) w = j;
  }
  return (1.0 - g) * eu + g * static_cast<double>(s.size()) * s[w] * u[w];
}

}  // namespace

TEST_CASE("subgame groups") {
  CHECK(attacker_subgame_sets()[0] == std::vector<int>{1, 2, 3});
  CHECK(attacker_subgame_sets()[2] == std::vector<int>{8, 9, 10});
  CHECK(defender_subgame_sets()[2] == std::vector<int>{7, 8, 10});
  CHECK(defender_subgame_sets(true)[2] == std::vector<int>{7, 8, 9, 10});
}

TEST_CASE("attacker utility terms") {
  AttackerUtilityInputs in;
  in.zeta = 5;
  SUBCASE("full target set gives ac = 1") {
    in.targets[2] = std::vector<TargetEstimate>(5, TargetEstimate{0.3, 0.4});
    CHECK(attacker_terms(in, StrategyIndex{3}, StrategyIndex{1}).ac == 1.0);
  }
  SUBCASE("empty target set") {
    for (int j = 1; j <= 10; ++j) {
      const auto t = attacker_terms(in, StrategyIndex{4}, StrategyIndex{j});
      CHECK(t.ai == 0.0);
      CHECK(t.di == 1.0);
      CHECK(attacker_utility(in, StrategyIndex{4}, StrategyIndex{j}) ==
            doctest::Approx((0.0 + j / 10.0 + 0.0) - (1.0 + std::exp(-5.0))).epsilon(1e-15));
    }
  }
  SUBCASE("certain, critical, full target set gives ai = 1") {
    in.targets[9] = std::vector<TargetEstimate>(5, TargetEstimate{1.0, 1.0});
    CHECK(attacker_terms(in, StrategyIndex{10}, StrategyIndex{2}).ai == doctest::Approx(1.0));
  }
  SUBCASE("matrix rows follow own strategy") {
    in.targets[0] = {TargetEstimate{0.5, 0.2}};
    const auto u = attacker_utility_matrix(in);
    CHECK(u(StrategyIndex{1}, StrategyIndex{7}) == attacker_utility(in, StrategyIndex{1}, StrategyIndex{7}));
    CHECK(u(StrategyIndex{1}, StrategyIndex{7}) != u(StrategyIndex{2}, StrategyIndex{7}));
  }
}

TEST_CASE("defender utility terms") {
  DefenderUtilityInputs in;
  in.zeta = 5;
  in.n_drone = 8;
  in.connect_estimate.fill(8);
  const auto top = defender_terms(in, StrategyIndex{10}, StrategyIndex{3});
  CHECK(top.dc == 1.0);
  CHECK(top.ac == 0.0);
  CHECK(top.di == 2.0);
  CHECK(top.ai == -1.0);
  in.remembered_vul[3] = {0.5, 0.5};
  const auto t = defender_terms(in, StrategyIndex{2}, StrategyIndex{4});
  CHECK(t.di == doctest::Approx(1.0 - 0.2 + 1.0));
  CHECK(t.ac == doctest::Approx(0.4));
  CHECK(t.dc == doctest::Approx(std::exp(-8.0)));
  CHECK(defender_utility(in, StrategyIndex{2}, StrategyIndex{4}) == doctest::Approx((t.di + t.ac) - (t.ai + t.dc)));
}

TEST_CASE("criticality maps the observable range onto (0,1]") {
  CHECK(criticality(Dbm{20}) == 1.0);
  CHECK(criticality(Dbm{-100}) == 0.0);
  CHECK(criticality(Dbm{-40}) == doctest::Approx(0.5));
}

TEST_CASE("belief counts") {
  BeliefState b(attacker_subgame_sets());
  for (int k = 0; k < kNumSubgames; ++k) {
    for (double c : b.cms_row(k)) CHECK(c == doctest::Approx(0.1).epsilon(1e-15));
  }
  b.update_counts(2, StrategyIndex{5});
  CHECK(b.counts(2)[4] == 2.0);
  CHECK(b.counts(0)[4] == 2.0);
  CHECK(b.counts(1)[4] == 1.0);
  const double before = b.cms_row(0)[4];
  b.update_counts(0, StrategyIndex{5});
  b.update_counts(0, StrategyIndex{5});
  CHECK(b.cms_row(0)[4] > before);
  CHECK_THROWS_AS(b.update_counts(4, StrategyIndex{1}), std::out_of_range);
}

TEST_CASE("normalization over a four-strategy subgame") {
  // counts [1,1,2,1] over {4,5,6,7} gives [0.2,0.2,0.4,0.2]
  BeliefState b(attacker_subgame_sets());
  b.update_counts(2, StrategyIndex{6});
  const auto r = b.restricted_row(2);
  CHECK(r[3] == doctest::Approx(0.2));
  CHECK(r[4] == doctest::Approx(0.2));
  CHECK(r[5] == doctest::Approx(0.4));
  CHECK(r[6] == doctest::Approx(0.2));
  CHECK(r[0] == 0.0);
}

TEST_CASE("aggregated belief") {
  BeliefState b(attacker_subgame_sets());
  for (double s : b.aggregated()) CHECK(s == doctest::Approx(0.1));
  for (int k = 0; k < 1000; ++k) b.update_counts(1, StrategyIndex{2});
  b.set_subgame_probs({0, 1, 0, 0});
  const auto s = b.aggregated();
  CHECK(s[1] > 0.99);
  CHECK(sum(s) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(b.set_subgame_probs({0.5, 0.6, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(b.set_subgame_probs({1.5, -0.5, 0, 0}), std::invalid_argument);
}

TEST_CASE("full-game belief reproduces smoothed frequencies") {
  Rng rng(12);
  BeliefState b(defender_subgame_sets());
  std::array<int, 10> freq{};
  int n = 0;
  for (int k = 0; k < 500; ++k) {
    const int s = 1 + static_cast<int>(rng() % 10);
    b.update_counts(static_cast<int>(rng() % 4), StrategyIndex{s});
    ++freq[static_cast<std::size_t>(s - 1)];
    ++n;
  }
  const auto agg = b.aggregated();
  for (std::size_t j = 0; j < 10; ++j) CHECK(agg[j] == doctest::Approx((freq[j] + 1.0) / (n + 10.0)).epsilon(1e-12));
}

TEST_CASE("probability vectors stay normalized under random updates") {
  Rng rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int seq = 0; seq < 10000; ++seq) {
    BeliefState b(seq % 2 ? attacker_subgame_sets() : defender_subgame_sets(seq % 4 == 0));
    const int len = 1 + static_cast<int>(rng() % 20);
    for (int k = 0; k < len; ++k) b.update_counts(static_cast<int>(rng() % 4), StrategyIndex{1 + static_cast<int>(rng() % 10)});
    SubgameVector p{u(rng), u(rng), u(rng), u(rng)};
    const double tot = sum(p);
    for (auto& v : p) v /= tot;
    p[0] = 1.0 - p[1] - p[2] - p[3];
    if (p[0] < 0.0) p[0] = 0.0;
    b.set_subgame_probs(p);
    for (int k = 0; k < kNumSubgames; ++k) {
      CHECK(std::abs(sum(b.cms_row(k)) - 1.0) < 1e-9);
      CHECK(std::abs(sum(b.restricted_row(k)) - 1.0) < 1e-9);
    }
    const auto s = b.aggregated();
    CHECK(std::abs(sum(s) - 1.0) < 1e-9);
    CHECK(*std::min_element(s.begin(), s.end()) >= 0.0);
    CHECK(std::abs(sum(b.subgame_probs()) - 1.0) < 1e-9);
  }
}

TEST_CASE("attacker subgame probabilities count observed drones") {
  BeliefState b(attacker_subgame_sets());
  std::vector<ObservedSignal> high{seen(1, -50), seen(2, -40), seen(3, -10), seen(4, 0)};
  CHECK(subgame_probs_attacker(b, high, false) == SubgameVector{0, 0, 0, 1});
  std::vector<ObservedSignal> mixed{seen(1, -99), seen(2, -98.5), seen(3, -60), seen(4, -30)};
  CHECK(subgame_probs_attacker(b, mixed, false) == SubgameVector{0, 0.5, 0, 0.5});
  CHECK(subgame_probs_attacker(b, {}, false) == SubgameVector{1, 0, 0, 0});
  CHECK(subgame_probs_attacker(b, high, true) == SubgameVector{1, 0, 0, 0});
}

TEST_CASE("defender subgame probabilities") {
  BeliefState b(defender_subgame_sets());
  UtilityMatrix flat;
  for (auto& row : flat.values) row.fill(0.7);
  const auto p = subgame_probs_defender(b, flat, false);
  CHECK(p[0] == 0.0);
  // {7,8,10} has three rows like the others, so all three tie
  CHECK(p[1] == doctest::Approx(1.0 / 3.0));
  CHECK(p[2] == doctest::Approx(1.0 / 3.0));
  CHECK(p[3] == doctest::Approx(1.0 / 3.0));
  CHECK(subgame_probs_defender(b, flat, true) == SubgameVector{1, 0, 0, 0});

  UtilityMatrix low;
  for (std::size_t j = 0; j < 10; ++j) low.values[j].fill(j < 3 ? 2.0 : -1.0);
  const auto q = subgame_probs_defender(b, low, false);
  CHECK(q[1] == *std::max_element(q.begin(), q.end()));
  CHECK(sum(q) == doctest::Approx(1.0));
  for (double v : q) CHECK(v >= 0.0);
}

TEST_CASE("uncertainty") {
  UncertaintyParams u{0.5, 0.3, 0};
  CHECK(u.g() == 1.0);
  double prev = 1.0;
  for (int n = 1; n < 50; ++n) {
    u.counter = n;
    CHECK(u.g() <= prev);
    CHECK(u.g() > 0.0);
    CHECK(u.g() == doctest::Approx(std::exp(-0.5 * 0.3 * n)));
    prev = u.g();
  }
}

TEST_CASE("heu degenerate cases are exact") {
  Rng rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(10), row(10);
    for (auto& v : s) v = u(rng) + 3.0;
    const double tot = sum(s);
    for (auto& v : s) v /= tot;
    for (auto& v : row) v = u(rng);
    double eu = 0.0;
    for (std::size_t j = 0; j < 10; ++j) eu += s[j] * row[j];
    const std::size_t w = worst_response(row);
    CHECK(heu(s, row, 0.0) == eu);
    CHECK(heu(s, row, 1.0) == 10.0 * s[w] * row[w]);
    // linear in g
    const double g = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK(heu(s, row, g) == (1.0 - g) * heu(s, row, 0.0) + g * heu(s, row, 1.0));
    CHECK(heu(s, row, g) == doctest::Approx(heu_oracle(s, row, g)).epsilon(1e-12));
  }
}

TEST_CASE("two-strategy toy") {
  const std::vector<double> s{0.5, 0.5};
  const std::vector<double> row{1.0, 0.0};
  CHECK(heu(s, row, 0.5) == 0.25);
  CHECK_THROWS_AS((void)heu(s, std::vector<double>{1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("worst response ties go low") {
  CHECK(worst_response(std::vector<double>{3, 1, 1, 2}) == 1);
  CHECK(worst_response(std::vector<double>{0, 0}) == 0);
}

TEST_CASE("equal utilities pick strategy one") {
  UtilityMatrix u;
  for (auto& r : u.values) r.fill(0.4);
  StrategyVector s;
  s.fill(0.1);
  CHECK(best_heu_strategy(u, s, 0.3) == StrategyIndex{1});
}

TEST_CASE("argmax is invariant under positive scaling") {
  Rng rng(77);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> pos(0.01, 100.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<double>> m(10, std::vector<double>(10));
    for (auto& r : m)
      for (auto& v : r) v = u(rng);
    std::vector<double> s(10);
    for (auto& v : s) v = unit(rng) + 1e-3;
    const double tot = sum(s);
    for (auto& v : s) v /= tot;
    const double g = unit(rng);
    const double a = pos(rng);
    auto scaled = m;
    for (auto& r : scaled)
      for (auto& v : r) v *= a;
    // brute force over rows with the oracle
    std::size_t brute = 0;
    for (std::size_t r = 1; r < 10; ++r) {
      if (heu_oracle(s, m[r], g) > heu_oracle(s, m[brute], g)) brute = r;
    }
    CHECK(best_heu_row(m, s, g) == brute);
    CHECK(best_heu_row(scaled, s, g) == brute);
  }
}

TEST_CASE("attacker context: fresh uncertainty forces the full game") {
  HypergameParams p;
  p.ad_min = 0.2;
  HypergameContext ctx(Role::Attacker, p);
  Rng rng(1);
  ctx.begin_episode(rng);
  CHECK(ctx.uncertainty().g() == 1.0);
  std::vector<ObservedSignal> sig{seen(1, -50), seen(2, -97)};
  for (int k = 0; k < 50; ++k) {
    (void)ctx.select_strategy(sig, rng);
    CHECK(ctx.last_gated());
    CHECK(ctx.belief().subgame_probs() == SubgameVector{1, 0, 0, 0});
  }
}

TEST_CASE("attacker context learns from outcomes") {
  HypergameParams p;
  p.zeta = 3;
  HypergameContext ctx(Role::Attacker, p);
  Rng rng(1);
  ctx.begin_episode(rng);
  CHECK(ctx.asr(4) == 0.5);
  std::vector<ObservedSignal> sig{seen(4, -50), seen(5, -90)};
  AttackOutcome o;
  o.strategy = StrategyIndex{10};
  o.targets = {4};
  o.compromised = {4};
  ctx.observe_as_attacker(sig, o);
  CHECK(ctx.asr(4) == doctest::Approx(2.0 / 3.0));
  CHECK(ctx.uncertainty().counter == 1);
  // strongest signal sits in band 10
  CHECK(ctx.belief().counts(0)[9] == 2.0);
  const auto in = ctx.attacker_inputs(sig);
  REQUIRE(in.targets[9].size() == 1);
  CHECK(in.targets[9][0].asr == doctest::Approx(2.0 / 3.0));
  ctx.begin_episode(rng);
  CHECK(ctx.asr(4) == 0.5);
  CHECK(ctx.belief().counts(0)[9] == 2.0);
}

TEST_CASE("defender context learns only on alerts") {
  HypergameParams p;
  p.memory_window = 2;
  HypergameContext ctx(Role::Defender, p);
  AttackOutcome quiet;
  quiet.strategy = StrategyIndex{3};
  quiet.targets = {1};
  ctx.observe_as_defender(quiet);
  CHECK(ctx.belief().counts(0)[2] == 1.0);
  CHECK(ctx.remembered_targets(StrategyIndex{3}).empty());

  AttackOutcome loud = quiet;
  loud.alerts = 1;
  loud.targets = {1, 7};
  ctx.observe_as_defender(loud);
  loud.targets = {2};
  ctx.observe_as_defender(loud);
  CHECK(ctx.remembered_targets(StrategyIndex{3}) == std::vector<int>{1, 2, 7});
  loud.targets = {3};
  ctx.observe_as_defender(loud);
  CHECK(ctx.remembered_targets(StrategyIndex{3}) == std::vector<int>{2, 3});
  CHECK(ctx.uncertainty().counter == 3);
  CHECK(ctx.belief().counts(0)[2] == 4.0);

  std::array<int, 10> conn{};
  conn.fill(3);
  const auto in = ctx.defender_inputs(conn, 4, {{2, 0.5}});
  CHECK(in.remembered_vul[2] == std::vector<double>{0.5, 0.0});
}

TEST_CASE("contexts reject the other player's view and bad params") {
  HypergameContext att(Role::Attacker, {});
  HypergameContext def(Role::Defender, {});
  Rng rng(1);
  CHECK_THROWS_AS((void)att.select_strategy(std::array<int, 10>{}, 1, {}, rng), std::logic_error);
  CHECK_THROWS_AS((void)def.select_strategy(std::vector<ObservedSignal>{}, rng), std::logic_error);
  HypergameParams bad;
  bad.zeta = 0;
  CHECK_THROWS_AS(HypergameContext(Role::Attacker, bad), std::invalid_argument);
}

TEST_CASE("belief snapshot") {
  BeliefState b(attacker_subgame_sets());
  const auto j = nlohmann::json::parse(belief_snapshot_json(b));
  CHECK(j["counts"].size() == 4);
  CHECK(j["S"].size() == 10);
  CHECK(j["P"][0] == 1.0);
}
