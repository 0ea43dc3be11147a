#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hdsim/geometry.hpp"

namespace hdsim {

using Rng = std::mt19937_64;

enum class DroneKind { Mission, Honey, Leader };
enum class DroneStatus { Active, Charging, Compromised, Crashed, Zombie };

[[nodiscard]] const char* to_string(DroneKind kind);
[[nodiscard]] const char* to_string(DroneStatus status);

struct DroneRecord {
  int id = 0;
  DroneKind kind = DroneKind::Mission;
  Position pos{};
  double battery = 0.0;  // mW-rounds
  double vul = 0.0;      // probability a DoS attempt compromises the drone
  DroneStatus status = DroneStatus::Active;
  Dbm tx_power{20.0};
  std::optional<int> assigned_cell;
  int charge_timer = 0;
  /// Level index used to price radio energy this round (1..10).
  int level_index = 10;
  /// Set once container protection has tripped; survives a charging cycle.
  bool contained = false;

  /// Flying, powered and reachable by radio.
  [[nodiscard]] bool on_air() const {
    return status == DroneStatus::Active || status == DroneStatus::Zombie;
  }
  /// Able to scan cells this round.
  [[nodiscard]] bool productive() const {
    return kind == DroneKind::Mission && status == DroneStatus::Active;
  }
};

/// Square-celled target area with per-cell scan progress.
class GridMap {
 public:
  GridMap() = default;
  GridMap(int width_cells, int height_cells, double cell_size, int scan_units_per_cell = 1);

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] double cell_size() const { return cell_size_; }
  [[nodiscard]] int cell_count() const { return width_ * height_; }
  [[nodiscard]] int scan_units_per_cell() const { return units_per_cell_; }

  [[nodiscard]] Position center(int cell, double altitude = 0.0) const;
  [[nodiscard]] double progress(int cell) const;
  [[nodiscard]] bool complete(int cell) const;
  [[nodiscard]] int completed_count() const;
  [[nodiscard]] int incomplete_count() const { return cell_count() - completed_count(); }
  [[nodiscard]] bool all_complete() const { return completed_count() == cell_count(); }
  [[nodiscard]] std::vector<int> incomplete_cells() const;
  /// Row-major progress values in [0, 1].
  [[nodiscard]] std::vector<double> progress_map() const;

  /// Adds one scan unit; returns true when this unit completes the cell.
  bool add_scan(int cell);

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.0;
  int units_per_cell_ = 1;
  std::vector<int> units_;
};

/// Per-drone visiting order over incomplete cells. Entry k belongs to mds[k];
/// drones that cannot work receive an empty sequence.
using TrajectoryPlan = std::vector<std::vector<int>>;

/// Greedy round-robin planner: each productive drone in turn claims the
/// nearest unclaimed incomplete cell to where its plan currently ends.
[[nodiscard]] TrajectoryPlan plan_trajectories(const GridMap& grid, std::span<const DroneRecord> mds);

struct DeploymentParams {
  int tau_lower = 2;
  int tau_upper = 4;
  /// Nearest pool MDs examined as relocation targets per HD.
  int relocation_candidates = 8;
};

struct HdPlacement {
  int hd_id = 0;
  Position pos{};
  std::vector<int> assigned_mds;
  bool relocated = false;
};

/// Greedy honey-drone placement. Protect radius is the reach of DS_5.
[[nodiscard]] std::vector<HdPlacement> deploy_honey_drones(std::span<const DroneRecord> hds,
                                                           std::span<const DroneRecord> mds,
                                                           const SignalRangeTable& table,
                                                           const DeploymentParams& params = {});

struct AttackOutcome {
  std::optional<StrategyIndex> strategy;
  std::vector<int> targets;      // strongest received first
  std::vector<int> compromised;  // MDs taken down
  std::vector<int> zombified;    // MDs neutralised by container protection
  int alerts = 0;                // HD detections
};

struct AttackParams {
  int zeta = 5;
  double hd_detect_prob = 1.0;
};

/// Received signal of every on-air, attackable drone at `observer`.
struct ObservedSignal {
  int drone_id = 0;
  Dbm received{};
  std::optional<StrategyIndex> band;
};
[[nodiscard]] std::vector<ObservedSignal> observe_signals(std::span<const DroneRecord> fleet,
                                                          const Position& observer,
                                                          const SignalRangeTable& table);

/// Resolves one DoS round against raw vulnerability. Does not mutate the fleet.
[[nodiscard]] AttackOutcome resolve_attack(StrategyIndex strategy, std::span<const DroneRecord> fleet,
                                           const Position& attacker_pos, const AttackParams& params,
                                           const SignalRangeTable& table, Rng& rng);

/// Writes compromised / zombified statuses from an outcome into the fleet.
void apply_attack(const AttackOutcome& outcome, std::span<DroneRecord> fleet);

struct EnergyParams {
  double platform_mw = 7900.0;  // E_P
  double camera_mw = 4.0;       // E_C
  double radio_mw = 100.0;      // E_R
  double capacity = 1'000'000.0;
  double threshold_frac = 0.10;
  int charge_rounds = 30;       // T_C
};

[[nodiscard]] double md_round_cost(int level_index, const EnergyParams& p);
[[nodiscard]] double hd_round_cost(int level_index, const EnergyParams& p);

/// One round of drain and charging bookkeeping. Returns energy spent.
double consume_energy(std::span<DroneRecord> fleet, StrategyIndex defense_level, const EnergyParams& params);

struct Connectivity {
  int count = 0;             // reachable drones, leader excluded
  std::vector<int> members;  // ids in ascending order
};

/// Multi-hop reachability from the leader; a link needs both ends in range.
[[nodiscard]] Connectivity active_connected(std::span<const DroneRecord> fleet, const SignalRangeTable& table);

}  // namespace hdsim
