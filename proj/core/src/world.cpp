#include "hdsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hdsim {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Running: return "running";
    case Termination::AllCellsComplete: return "all-cells-complete";
    case Termination::TimeLimit: return "time-limit";
    case Termination::NoDronesAvailable: return "no-drones-available";
  }
  return "?";
}

Position WorldConfig::resolved_attacker_pos() const {
  if (attacker_pos) return *attacker_pos;
  return Position{grid_width * cell_size / 2.0, -200.0, 0.0};
}

void WorldConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(grid_width >= 1 && grid_height >= 1, "grid dimensions must be >= 1");
  require(cell_size > 0.0, "cell_size must be positive");
  require(scan_units_per_cell >= 1, "scan_units_per_cell must be >= 1");
  require(mission_drones >= 0 && honey_drones >= 0 && spare_mission_drones >= 0, "drone counts must be >= 0");
  require(energy.platform_mw > 0.0 && energy.camera_mw > 0.0 && energy.radio_mw > 0.0,
          "energy rates must be positive");
  require(energy.capacity > 0.0, "battery capacity must be positive");
  require(energy.threshold_frac > 0.0 && energy.threshold_frac < 1.0, "threshold_frac must lie in (0,1)");
  require(energy.charge_rounds >= 1, "charge_rounds must be >= 1");
  require(zeta >= 1, "zeta must be >= 1");
  require(hd_detect_prob >= 0.0 && hd_detect_prob <= 1.0, "hd_detect_prob must lie in [0,1]");
  require(ids_detect_prob >= 0.0 && ids_detect_prob <= 1.0, "ids_detect_prob must lie in [0,1]");
  require(deployment.tau_lower >= 0 && deployment.tau_upper >= deployment.tau_lower,
          "need 0 <= tau_lower <= tau_upper");
  require(deployment.relocation_candidates >= 1, "relocation_candidates must be >= 1");
  require(rho >= 0.0, "rho must be >= 0");
  require(max_rounds >= 0, "max_rounds must be >= 0");
  require(vul_min >= 0.0 && vul_max <= 1.0 && vul_min <= vul_max, "need 0 <= vul_min <= vul_max <= 1");
  require(eta > 0.0, "eta must be positive");
}

std::array<int, kNumStrategies> AttackerObservation::band_counts() const {
  std::array<int, kNumStrategies> counts{};
  for (const auto& s : signals) {
    if (s.band) ++counts[s.band->slot()];
  }
  return counts;
}

World::World(WorldConfig config, Rng& rng)
    : config_(std::move(config)),
      table_(build_range_table(config_.eta)),
      grid_(config_.grid_width, config_.grid_height, config_.cell_size, config_.scan_units_per_cell),
      attacker_pos_(config_.resolved_attacker_pos()),
      spares_left_(config_.spare_mission_drones) {
  config_.validate();
  const Position launch = launch_point();

  DroneRecord leader;
  leader.id = next_id_++;
  leader.kind = DroneKind::Leader;
  leader.pos = Position{launch.x, launch.y, config_.leader_altitude};
  leader.battery = config_.energy.capacity;
  leader.tx_power = Dbm{config_.leader_tx_dbm};
  fleet_.push_back(leader);

  std::uniform_real_distribution<double> vul(config_.vul_min, config_.vul_max);
  for (int k = 0; k < config_.mission_drones; ++k) {
    DroneRecord md;
    md.id = next_id_++;
    md.kind = DroneKind::Mission;
    md.pos = launch;
    md.battery = config_.energy.capacity;
    md.vul = vul(rng);
    fleet_.push_back(md);
  }
  for (int k = 0; k < config_.honey_drones; ++k) {
    DroneRecord hd;
    hd.id = next_id_++;
    hd.kind = DroneKind::Honey;
    hd.pos = launch;
    hd.battery = config_.energy.capacity;
    hd.vul = 0.0;
    fleet_.push_back(hd);
  }
  initial_team_ = config_.mission_drones + config_.honey_drones;
  refresh_termination();
}

Position World::launch_point() const {
  return Position{config_.grid_width * config_.cell_size / 2.0, config_.grid_height * config_.cell_size / 2.0,
                  config_.drone_altitude};
}

double World::completion_ratio() const {
  return static_cast<double>(grid_.completed_count()) / grid_.cell_count();
}

Dbm World::md_tx(StrategyIndex j) const {
  if (config_.rho_mode == RhoMode::Index) {
    const int k = std::max(1, j.value() - static_cast<int>(std::lround(config_.rho)));
    return table_.level(StrategyIndex{k});
  }
  return Dbm{table_.level(j).value - config_.rho};
}

int World::md_level_index(StrategyIndex j) const {
  const double sg = md_tx(j).value;
  int best = 1;
  for (int k = 1; k <= kNumStrategies; ++k) {
    if (table_.level(StrategyIndex{k}).value <= sg) best = k;
  }
  return best;
}

void World::apply_defense(StrategyIndex j) {
  const Dbm hd_tx = table_.level(j);
  const Dbm md_power = md_tx(j);
  const int md_index = md_level_index(j);
  for (auto& d : fleet_) {
    switch (d.kind) {
      case DroneKind::Honey:
        d.tx_power = hd_tx;
        d.level_index = j.value();
        break;
      case DroneKind::Mission:
        d.tx_power = md_power;
        d.level_index = md_index;
        break;
      case DroneKind::Leader:
        break;
    }
  }
}

int World::hypothetical_connected(StrategyIndex j) const {
  std::vector<DroneRecord> copy = fleet_;
  const Dbm hd_tx = table_.level(j);
  const Dbm md_power = md_tx(j);
  for (auto& d : copy) {
    if (d.kind == DroneKind::Honey) d.tx_power = hd_tx;
    if (d.kind == DroneKind::Mission) d.tx_power = md_power;
  }
  return active_connected(copy, table_).count;
}

std::vector<double> World::defender_state() const {
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(grid_.cell_count()) + 1);
  s.push_back(completion_ratio());
  const auto map = grid_.progress_map();
  s.insert(s.end(), map.begin(), map.end());
  return s;
}

void World::launch_spares() {
  if (spares_left_ <= 0) return;
  const Position launch = launch_point();
  const auto lost = static_cast<int>(std::count_if(fleet_.begin(), fleet_.end(), [](const DroneRecord& d) {
    return d.kind == DroneKind::Mission &&
           (d.status == DroneStatus::Compromised || d.status == DroneStatus::Crashed) && d.charge_timer == 0;
  }));
  // charge_timer doubles as a "replaced" marker on lost drones.
  int to_launch = std::min(lost, spares_left_);
  for (auto& d : fleet_) {
    if (to_launch == 0) break;
    if (d.kind == DroneKind::Mission &&
        (d.status == DroneStatus::Compromised || d.status == DroneStatus::Crashed) && d.charge_timer == 0) {
      d.charge_timer = -1;
      DroneRecord md;
      md.id = next_id_++;
      md.kind = DroneKind::Mission;
      md.pos = launch;
      md.battery = config_.energy.capacity;
      md.vul = d.vul;
      fleet_.push_back(md);
      --spares_left_;
      --to_launch;
    }
  }
}

int World::move_and_scan() {
  std::vector<DroneRecord> mds;
  std::vector<std::size_t> md_slots;
  for (std::size_t k = 0; k < fleet_.size(); ++k) {
    if (fleet_[k].kind == DroneKind::Mission) {
      mds.push_back(fleet_[k]);
      md_slots.push_back(k);
    }
  }
  const TrajectoryPlan plan = plan_trajectories(grid_, mds);
  for (std::size_t k = 0; k < mds.size(); ++k) {
    auto& d = fleet_[md_slots[k]];
    if (!d.productive()) continue;
    if (plan[k].empty()) {
      d.assigned_cell.reset();
      continue;
    }
    d.assigned_cell = plan[k].front();
    d.pos = grid_.center(plan[k].front(), config_.drone_altitude);
  }

  for (const auto& placement : placements_) {
    auto hd = std::find_if(fleet_.begin(), fleet_.end(), [&](const DroneRecord& d) { return d.id == placement.hd_id; });
    if (hd == fleet_.end()) continue;
    Position target = placement.pos;
    if (config_.hd_follow_assigned && !placement.assigned_mds.empty()) {
      Position c{0.0, 0.0, config_.drone_altitude};
      for (int id : placement.assigned_mds) {
        const auto md = std::find_if(fleet_.begin(), fleet_.end(), [&](const DroneRecord& d) { return d.id == id; });
        c.x += md->pos.x;
        c.y += md->pos.y;
      }
      c.x /= static_cast<double>(placement.assigned_mds.size());
      c.y /= static_cast<double>(placement.assigned_mds.size());
      target = c;
    }
    hd->pos = target;
  }

  std::vector<int> linked;
  if (config_.scan_requires_link) linked = active_connected(fleet_, table_).members;

  int completed = 0;
  for (auto& d : fleet_) {
    if (!d.productive() || !d.assigned_cell) continue;
    if (config_.scan_requires_link && !std::binary_search(linked.begin(), linked.end(), d.id)) continue;
    if (grid_.add_scan(*d.assigned_cell)) ++completed;
  }
  return completed;
}

RoundReport World::step_round(StrategyIndex defense, const AttackerDecision& attacker, Rng& rng) {
  if (terminated()) {
    throw StateError(std::string("step_round: mission already terminated (") + to_string(termination_) + ")");
  }
  RoundReport report;
  report.t = t_;
  report.defense = defense;
  report.tasks_outstanding_at_start = grid_.incomplete_count();

  launch_spares();

  // (1) defence levels
  apply_defense(defense);

  // (2) honey-drone deployment
  std::vector<DroneRecord> hds;
  std::vector<DroneRecord> mds;
  for (const auto& d : fleet_) {
    if (d.kind == DroneKind::Honey && d.status == DroneStatus::Active) hds.push_back(d);
    if (d.kind == DroneKind::Mission) mds.push_back(d);
  }
  placements_ = deploy_honey_drones(hds, mds, table_, config_.deployment);

  // (3) movement and scanning
  report.tasks_completed = move_and_scan();

  // (4) attack
  AttackerObservation view;
  view.signals = observe_signals(fleet_, attacker_pos_, table_);
  view.zeta = config_.zeta;
  view.round = t_;
  const StrategyIndex choice = attacker(view);
  const AttackParams params{config_.zeta, config_.hd_detect_prob};
  AttackOutcome outcome = resolve_attack(choice, fleet_, attacker_pos_, params, table_, rng);
  outcome = mitigate(config_.mitigation, config_.ids_detect_prob, std::move(outcome), fleet_, rng);
  apply_attack(outcome, fleet_);
  report.attack = std::move(outcome);
  report.attacker_view = std::move(view);

  // (5) energy
  report.energy_spent = consume_energy(fleet_, defense, config_.energy);

  // (6) connectivity
  report.n_active_connected = active_connected(fleet_, table_).count;

  ++t_;
  refresh_termination();
  return report;
}

void World::refresh_termination() {
  if (grid_.all_complete()) {
    termination_ = Termination::AllCellsComplete;
    return;
  }
  if (t_ >= config_.max_rounds) {
    termination_ = Termination::TimeLimit;
    return;
  }
  const bool any_available = std::any_of(fleet_.begin(), fleet_.end(), [](const DroneRecord& d) {
    return d.kind == DroneKind::Mission &&
           (d.status == DroneStatus::Active || d.status == DroneStatus::Charging || d.status == DroneStatus::Zombie);
  });
  termination_ = (any_available || spares_left_ > 0) ? Termination::Running : Termination::NoDronesAvailable;
}

}  // namespace hdsim
