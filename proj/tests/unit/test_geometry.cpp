#include <cmath>
#include <random>

#include "doctest.h"
#include "hdsim/geometry.hpp"

using namespace hdsim;

TEST_CASE("distance") {
  CHECK(distance({0, 0, 0}, {0, 0, 0}) == 0.0);
  CHECK(distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(distance({1, 2, 2}, {0, 0, 0}) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("distance is symmetric and obeys the triangle inequality") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2000.0, 2000.0);
  for (int k = 0; k < 10000; ++k) {
    const Position a{u(rng), u(rng), std::abs(u(rng))};
    const Position b{u(rng), u(rng), std::abs(u(rng))};
    const Position c{u(rng), u(rng), std::abs(u(rng))};
    CHECK(distance(a, b) == distance(b, a));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
    CHECK(distance(a, b) >= 0.0);
  }
}

TEST_CASE("received power follows log-distance loss") {
  const auto& t = default_range_table();
  CHECK(received_power(Dbm{20}, 1.0, t).value == doctest::Approx(20.0));
  CHECK(received_power(Dbm{20}, 100.0, t).value == doctest::Approx(-60.0));
  CHECK(received_power(Dbm{20}, 1000.0, t).value == doctest::Approx(-100.0));
  CHECK_THROWS_AS((void)received_power(Dbm{20}, 0.0, t), std::domain_error);
  CHECK_THROWS_AS((void)received_power(Dbm{20}, -3.0, t), std::domain_error);
}

TEST_CASE("range radius") {
  CHECK(range_radius(Dbm{20}) == doctest::Approx(1000.0));
  CHECK(range_radius(Dbm{-20}) == doctest::Approx(100.0));
  CHECK(range_radius(Dbm{-100}) == doctest::Approx(1.0));
}

TEST_CASE("range radius and received power round-trip at every defender level") {
  const auto& t = default_range_table();
  for (int j = 1; j <= kNumStrategies; ++j) {
    const Dbm sg = t.level(StrategyIndex{j});
    CHECK(std::abs(received_power(sg, range_radius(sg, t), t).value - (-100.0)) < 1e-9);
  }
}

TEST_CASE("defender levels match the printed ten-level table") {
  const double printed[] = {-20, -7.9, -0.9, 4.0, 7.9, 11.1, 13.8, 16.1, 18.1, 20};
  const auto& t = default_range_table();
  for (int j = 1; j <= kNumStrategies; ++j) {
    CHECK(std::abs(t.level(StrategyIndex{j}).value - printed[j - 1]) < 0.1);
    // independent evaluation of an even 100..1000 m split
    CHECK(t.level(StrategyIndex{j}).value == doctest::Approx(40.0 * std::log10(100.0 * j) - 100.0).epsilon(1e-12));
  }
  for (int j = 2; j <= kNumStrategies; ++j) {
    CHECK(t.level(StrategyIndex{j}) > t.level(StrategyIndex{j - 1}));
  }
}

TEST_CASE("attacker bands match the printed boundaries") {
  const double upper[] = {-98.1, -96.1, -93.8, -91.1, -87.9, -84.0, -79.0, -72.0, -60.0, 20.0};
  const auto& t = default_range_table();
  CHECK(t.range(StrategyIndex{1}).lower == -100.0);
  for (int i = 1; i <= kNumStrategies; ++i) {
    CHECK(std::abs(t.range(StrategyIndex{i}).upper - upper[i - 1]) < 0.1);
    if (i > 1) CHECK(t.range(StrategyIndex{i}).lower == t.range(StrategyIndex{i - 1}).upper);
  }
  CHECK(t.range(StrategyIndex{4}).lower == doctest::Approx(20.0 - 40.0 * std::log10(700.0)));
  CHECK(t.range(StrategyIndex{8}).upper == doctest::Approx(20.0 - 40.0 * std::log10(200.0)));
}

TEST_CASE("classify received power") {
  const auto& t = default_range_table();
  // the printed -98.1 edge is rounded; the derived edge sits at -98.17
  CHECK(classify_received(Dbm{-98.2}, t)->value() == 1);
  CHECK(classify_received(Dbm{-98.1}, t)->value() == 2);
  CHECK(classify_received(Dbm{-59.9}, t)->value() == 10);
  CHECK(classify_received(Dbm{20.0}, t)->value() == 10);
  CHECK_FALSE(classify_received(Dbm{-101.0}, t).has_value());
  CHECK_FALSE(classify_received(Dbm{-100.0}, t).has_value());
  // upper edges are inclusive, lower edges exclusive
  for (int i = 1; i <= kNumStrategies; ++i) {
    const auto& r = t.range(StrategyIndex{i});
    CHECK(classify_received(Dbm{r.upper}, t)->value() == i);
    if (i < kNumStrategies) CHECK(classify_received(Dbm{std::nextafter(r.upper, 100.0)}, t)->value() == i + 1);
  }
}

TEST_CASE("classification partitions the observable interval") {
  const auto& t = default_range_table();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 20.0);
  for (int k = 0; k < 20000; ++k) {
    const double sg = u(rng);
    if (sg <= -100.0) continue;
    int hits = 0;
    for (int i = 1; i <= kNumStrategies; ++i) hits += t.range(StrategyIndex{i}).contains(sg) ? 1 : 0;
    CHECK(hits == 1);
    REQUIRE(classify_received(Dbm{sg}, t).has_value());
    CHECK(t.range(*classify_received(Dbm{sg}, t)).contains(sg));
  }
}

TEST_CASE("strategy index bounds") {
  CHECK_THROWS_AS(StrategyIndex{0}, std::out_of_range);
  CHECK_THROWS_AS(StrategyIndex{11}, std::out_of_range);
  CHECK(StrategyIndex{1}.slot() == 0);
  CHECK(StrategyIndex{10}.value() == 10);
}
