#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>

namespace hdsim {

/// Number of signal strategies available to each player.
inline constexpr int kNumStrategies = 10;

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

/// Signal power in decibel-milliwatts.
struct Dbm {
  double value = 0.0;

  friend auto operator<=>(const Dbm&, const Dbm&) = default;
};

/// 1-based index naming an attacker range AS_i or a defender level DS_j.
class StrategyIndex {
 public:
  constexpr StrategyIndex() = default;
  constexpr explicit StrategyIndex(int index) : index_(index) {
    if (index < 1 || index > kNumStrategies) {
      throw std::out_of_range("strategy index must lie in 1..10");
    }
  }

  [[nodiscard]] constexpr int value() const { return index_; }
  /// Zero-based position for array lookups.
  [[nodiscard]] constexpr std::size_t slot() const { return static_cast<std::size_t>(index_ - 1); }

  friend constexpr auto operator<=>(const StrategyIndex&, const StrategyIndex&) = default;

 private:
  int index_ = 1;
};

/// Half-open interval (lower, upper] of received power.
struct DbmInterval {
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] bool contains(double sg) const { return sg > lower && sg <= upper; }
};

/// Attacker reception bands and defender transmit levels derived from the
/// log-distance path-loss model. Immutable once built.
struct SignalRangeTable {
  std::array<DbmInterval, kNumStrategies> attacker_ranges{};
  std::array<Dbm, kNumStrategies> defender_levels{};
  double eta = 4.0;
  Dbm ref_power{20.0};
  double ref_distance = 1.0;
  /// Received power at and below which nothing is observable.
  double floor_dbm = -100.0;

  [[nodiscard]] Dbm level(StrategyIndex j) const { return defender_levels[j.slot()]; }
  [[nodiscard]] const DbmInterval& range(StrategyIndex i) const { return attacker_ranges[i.slot()]; }
};

[[nodiscard]] double distance(const Position& a, const Position& b);

/// Log-distance path loss: tx - eta*10*log10(d/ref_distance).
/// Throws std::domain_error when d <= 0.
[[nodiscard]] Dbm received_power(Dbm tx, double d, const SignalRangeTable& table);

/// Distance at which a transmission at `sg` fades to the reception floor.
[[nodiscard]] double range_radius(Dbm sg, double eta = 4.0, double floor_dbm = -100.0);
[[nodiscard]] double range_radius(Dbm sg, const SignalRangeTable& table);

/// Builds the ten-level tables: defender levels split 100..1000 m evenly,
/// attacker band edges at the received power of a max-power drone at
/// 900, 800, ..., 100 m.
[[nodiscard]] SignalRangeTable build_range_table(double eta = 4.0, Dbm ref_power = Dbm{20.0},
                                                 double ref_distance = 1.0);

/// Index of the attacker band holding `sg`, or nullopt at or below the floor.
[[nodiscard]] std::optional<StrategyIndex> classify_received(Dbm sg, const SignalRangeTable& table);

/// Shared default table (eta = 4, 20 dBm at 1 m).
[[nodiscard]] const SignalRangeTable& default_range_table();

}  // namespace hdsim
