#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdsim/fleet.hpp"
#include "hdsim/geometry.hpp"
#include "hdsim/mitigation.hpp"

namespace hdsim {

/// Raised when a finished mission is stepped again.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// How the MD transmit power trails the HD power.
enum class RhoMode {
  Dbm,    // sg_MD = sg_HD - rho dB
  Index,  // sg_MD = level(j - rho), clamped at level 1
};

struct WorldConfig {
  int grid_width = 5;
  int grid_height = 5;
  double cell_size = 150.0;
  int scan_units_per_cell = 1;

  int mission_drones = 15;
  int honey_drones = 5;
  int spare_mission_drones = 0;

  double drone_altitude = 50.0;
  double leader_altitude = 50.0;
  double leader_tx_dbm = 20.0;
  /// Defaults to 200 m south of the midpoint of the area's south edge.
  std::optional<Position> attacker_pos;

  EnergyParams energy{};
  int zeta = 5;
  double hd_detect_prob = 1.0;
  DeploymentParams deployment{};
  /// HDs hover over the centroid of the MDs they were assigned.
  bool hd_follow_assigned = true;

  double rho = 5.0;
  RhoMode rho_mode = RhoMode::Dbm;

  int max_rounds = 150;
  double vul_min = 0.3;
  double vul_max = 0.9;
  /// Scanned data only counts when the MD has a path to the leader.
  bool scan_requires_link = true;

  Mitigation mitigation = Mitigation::HoneyAbsorb;
  double ids_detect_prob = 0.8;

  double eta = 4.0;

  [[nodiscard]] Position resolved_attacker_pos() const;
  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// What the attacker sees before picking a band: received strengths only.
struct AttackerObservation {
  std::vector<ObservedSignal> signals;
  int zeta = 0;
  int round = 0;

  /// Drones observed per band (N_TR).
  [[nodiscard]] std::array<int, kNumStrategies> band_counts() const;
};

using AttackerDecision = std::function<StrategyIndex(const AttackerObservation&)>;

struct RoundReport {
  int t = 0;
  int tasks_completed = 0;
  int tasks_outstanding_at_start = 0;
  int n_active_connected = 0;
  double energy_spent = 0.0;
  AttackOutcome attack;
  StrategyIndex defense{};
  AttackerObservation attacker_view;

  /// Attacker reward N_MNC.
  [[nodiscard]] int tasks_not_completed() const { return tasks_outstanding_at_start - tasks_completed; }
};

enum class Termination { Running, AllCellsComplete, TimeLimit, NoDronesAvailable };

[[nodiscard]] const char* to_string(Termination t);

class World {
 public:
  World(WorldConfig config, Rng& rng);

  /// Runs one attack/defence round in a fixed phase order:
  /// defence levels, HD deployment, movement and scanning, attack,
  /// energy, connectivity.
  RoundReport step_round(StrategyIndex defense, const AttackerDecision& attacker, Rng& rng);

  [[nodiscard]] const WorldConfig& config() const { return config_; }
  [[nodiscard]] const SignalRangeTable& table() const { return table_; }
  [[nodiscard]] const GridMap& grid() const { return grid_; }
  [[nodiscard]] const std::vector<DroneRecord>& fleet() const { return fleet_; }
  [[nodiscard]] std::vector<DroneRecord>& mutable_fleet() { return fleet_; }
  [[nodiscard]] GridMap& mutable_grid() { return grid_; }
  [[nodiscard]] const std::vector<HdPlacement>& last_placements() const { return placements_; }
  [[nodiscard]] Position attacker_pos() const { return attacker_pos_; }
  [[nodiscard]] Position launch_point() const;
  [[nodiscard]] int round() const { return t_; }
  [[nodiscard]] bool terminated() const { return termination_ != Termination::Running; }
  [[nodiscard]] Termination termination() const { return termination_; }
  /// MDs plus HDs initially assigned to the mission team.
  [[nodiscard]] int initial_team_size() const { return initial_team_; }
  [[nodiscard]] double completion_ratio() const;

  /// MD transmit power and energy level index under defence level j.
  [[nodiscard]] Dbm md_tx(StrategyIndex j) const;
  [[nodiscard]] int md_level_index(StrategyIndex j) const;

  /// Connected-drone count if every drone switched to level j in place.
  [[nodiscard]] int hypothetical_connected(StrategyIndex j) const;

  /// Defender DRL state: completion ratio followed by the scan map.
  [[nodiscard]] std::vector<double> defender_state() const;

  /// Re-evaluates termination (after external edits to the world).
  void refresh_termination();

 private:
  void apply_defense(StrategyIndex j);
  void launch_spares();
  int move_and_scan();

  WorldConfig config_;
  SignalRangeTable table_;
  GridMap grid_;
  std::vector<DroneRecord> fleet_;
  std::vector<HdPlacement> placements_;
  Position attacker_pos_{};
  int t_ = 0;
  int initial_team_ = 0;
  int spares_left_ = 0;
  int next_id_ = 0;
  Termination termination_ = Termination::Running;
};

}  // namespace hdsim
