#include "hdsim/geometry.hpp"

#include <cmath>

namespace hdsim {

double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Dbm received_power(Dbm tx, double d, const SignalRangeTable& table) {
  if (!(d > 0.0)) {
    throw std::domain_error("received_power: distance must be positive");
  }
  return Dbm{tx.value - table.eta * 10.0 * std::log10(d / table.ref_distance)};
}

double range_radius(Dbm sg, double eta, double floor_dbm) {
  return std::pow(10.0, (sg.value - floor_dbm) / (eta * 10.0));
}

double range_radius(Dbm sg, const SignalRangeTable& table) {
  return table.ref_distance * range_radius(sg, table.eta, table.floor_dbm);
}

SignalRangeTable build_range_table(double eta, Dbm ref_power, double ref_distance) {
  if (!(eta > 0.0) || !(ref_distance > 0.0)) {
    throw std::invalid_argument("build_range_table: eta and ref_distance must be positive");
  }
  SignalRangeTable t;
  t.eta = eta;
  t.ref_power = ref_power;
  t.ref_distance = ref_distance;

  // Level k reaches exactly 100*k metres before fading to the floor.
  for (int k = 1; k <= kNumStrategies; ++k) {
    const double reach = 100.0 * k / ref_distance;
    t.defender_levels[k - 1] = Dbm{eta * 10.0 * std::log10(reach) + t.floor_dbm};
  }

  // Band edges: max-power received strength at 1000, 900, ..., 100 m.
  // The top band runs up to the maximum transmit power.
  auto edge_at = [&](double metres) { return received_power(ref_power, metres, t).value; };
  for (int i = 0; i < kNumStrategies; ++i) {
    const double lower = edge_at(1000.0 - 100.0 * i);
    const double upper = i + 1 < kNumStrategies ? edge_at(900.0 - 100.0 * i) : ref_power.value;
    t.attacker_ranges[i] = DbmInterval{lower, upper};
  }
  // Pin the outer edges so the bands tile (floor, ref_power] exactly.
  t.attacker_ranges.front().lower = t.floor_dbm;
  return t;
}

std::optional<StrategyIndex> classify_received(Dbm sg, const SignalRangeTable& table) {
  if (sg.value <= table.floor_dbm) {
    return std::nullopt;
  }
  for (int i = 0; i < kNumStrategies; ++i) {
    if (table.attacker_ranges[i].contains(sg.value)) {
      return StrategyIndex{i + 1};
    }
  }
  // Stronger than the top band's upper edge; the top band is the closest match.
  return StrategyIndex{kNumStrategies};
}

const SignalRangeTable& default_range_table() {
  static const SignalRangeTable table = build_range_table();
  return table;
}

}  // namespace hdsim
