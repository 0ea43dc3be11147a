#include "hdsim/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hdsim {

const char* to_string(DroneKind kind) {
  switch (kind) {
    case DroneKind::Mission: return "MD";
    case DroneKind::Honey: return "HD";
    case DroneKind::Leader: return "RLD";
  }
  return "?";
}

const char* to_string(DroneStatus status) {
  switch (status) {
    case DroneStatus::Active: return "Active";
    case DroneStatus::Charging: return "Charging";
    case DroneStatus::Compromised: return "Compromised";
    case DroneStatus::Crashed: return "Crashed";
    case DroneStatus::Zombie: return "Zombie";
  }
  return "?";
}

// ---------------------------------------------------------------- GridMap

GridMap::GridMap(int width_cells, int height_cells, double cell_size, int scan_units_per_cell)
    : width_(width_cells),
      height_(height_cells),
      cell_size_(cell_size),
      units_per_cell_(scan_units_per_cell),
      units_(static_cast<std::size_t>(std::max(0, width_cells * height_cells)), 0) {
  if (width_cells < 1 || height_cells < 1 || !(cell_size > 0.0) || scan_units_per_cell < 1) {
    throw std::invalid_argument("GridMap: dimensions, cell size and scan units must be positive");
  }
}

Position GridMap::center(int cell, double altitude) const {
  const int row = cell / width_;
  const int col = cell % width_;
  return Position{(col + 0.5) * cell_size_, (row + 0.5) * cell_size_, altitude};
}

double GridMap::progress(int cell) const {
  return static_cast<double>(units_.at(static_cast<std::size_t>(cell))) / units_per_cell_;
}

bool GridMap::complete(int cell) const {
  return units_.at(static_cast<std::size_t>(cell)) >= units_per_cell_;
}

int GridMap::completed_count() const {
  return static_cast<int>(
      std::count_if(units_.begin(), units_.end(), [this](int u) { return u >= units_per_cell_; }));
}

std::vector<int> GridMap::incomplete_cells() const {
  std::vector<int> out;
  for (int c = 0; c < cell_count(); ++c) {
    if (!complete(c)) out.push_back(c);
  }
  return out;
}

std::vector<double> GridMap::progress_map() const {
  std::vector<double> out(units_.size());
  for (std::size_t i = 0; i < units_.size(); ++i) {
    out[i] = static_cast<double>(units_[i]) / units_per_cell_;
  }
  return out;
}

bool GridMap::add_scan(int cell) {
  auto& u = units_.at(static_cast<std::size_t>(cell));
  if (u >= units_per_cell_) return false;
  ++u;
  return u == units_per_cell_;
}

// ---------------------------------------------------------------- planner

TrajectoryPlan plan_trajectories(const GridMap& grid, std::span<const DroneRecord> mds) {
  TrajectoryPlan plan(mds.size());
  std::vector<std::size_t> workers;
  std::vector<Position> cursor;
  for (std::size_t k = 0; k < mds.size(); ++k) {
    if (mds[k].productive()) {
      workers.push_back(k);
      cursor.push_back(mds[k].pos);
    }
  }
  if (workers.empty()) return plan;

  std::vector<int> open = grid.incomplete_cells();
  std::vector<char> claimed(open.size(), 0);
  std::size_t remaining = open.size();
  std::size_t turn = 0;
  while (remaining > 0) {
    const std::size_t w = turn % workers.size();
    const Position& from = cursor[w];
    std::size_t best = open.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < open.size(); ++c) {
      if (claimed[c]) continue;
      Position p = grid.center(open[c], from.z);
      const double d = distance(from, p);
      if (d < best_d) {  // strict: lowest cell index wins ties
        best_d = d;
        best = c;
      }
    }
    claimed[best] = 1;
    --remaining;
    plan[workers[w]].push_back(open[best]);
    cursor[w] = grid.center(open[best], from.z);
    ++turn;
  }
  return plan;
}

// ---------------------------------------------------------------- deployment

namespace {

struct PoolEntry {
  int id;
  Position pos;
  double d;  // scratch: distance to the HD under consideration
};

bool nearer(const PoolEntry& a, const PoolEntry& b) {
  return a.d < b.d || (a.d == b.d && a.id < b.id);
}

}  // namespace

std::vector<HdPlacement> deploy_honey_drones(std::span<const DroneRecord> hds, std::span<const DroneRecord> mds,
                                             const SignalRangeTable& table, const DeploymentParams& params) {
  if (params.tau_lower < 0 || params.tau_upper < params.tau_lower) {
    throw std::invalid_argument("deploy_honey_drones: need 0 <= tau_lower <= tau_upper");
  }
  const double radius = range_radius(table.level(StrategyIndex{5}), table);

  std::vector<PoolEntry> pool;
  pool.reserve(mds.size());
  for (const auto& md : mds) {
    if (md.kind == DroneKind::Mission && md.status == DroneStatus::Active) {
      pool.push_back(PoolEntry{md.id, md.pos, 0.0});
    }
  }

  std::vector<HdPlacement> out;
  out.reserve(hds.size());
  std::vector<PoolEntry> scratch;
  scratch.reserve(pool.size());

  auto take = [&](HdPlacement& placement, std::span<const PoolEntry> chosen) {
    for (const auto& e : chosen) placement.assigned_mds.push_back(e.id);
    std::sort(placement.assigned_mds.begin(), placement.assigned_mds.end());
    std::erase_if(pool, [&](const PoolEntry& e) {
      return std::binary_search(placement.assigned_mds.begin(), placement.assigned_mds.end(), e.id);
    });
  };

  for (const auto& hd : hds) {
    HdPlacement placement{hd.id, hd.pos, {}, false};
    if (pool.empty()) {
      out.push_back(std::move(placement));
      continue;
    }

    scratch.clear();
    for (auto& e : pool) {
      e.d = distance(hd.pos, e.pos);
      if (e.d < radius) scratch.push_back(e);
    }
    const int covered = static_cast<int>(scratch.size());

    if (covered < params.tau_lower) {
      // Relocate onto one of the nearest pool MDs whose neighbourhood size is feasible.
      const auto k = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(params.relocation_candidates));
      std::vector<PoolEntry> candidates = pool;
      std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       candidates.end(), nearer);
      candidates.resize(k);
      std::sort(candidates.begin(), candidates.end(), nearer);
      for (const auto& cand : candidates) {
        scratch.clear();
        for (const auto& e : pool) {
          if (distance(cand.pos, e.pos) < radius) scratch.push_back(e);
        }
        const int n = static_cast<int>(scratch.size());
        if (n >= params.tau_lower && n <= params.tau_upper) {
          placement.pos = Position{cand.pos.x, cand.pos.y, hd.pos.z};
          placement.relocated = true;
          take(placement, scratch);
          break;
        }
      }
    } else if (covered <= params.tau_upper) {
      take(placement, scratch);
    } else {
      const auto cut = scratch.begin() + params.tau_upper;
      std::nth_element(scratch.begin(), cut - 1, scratch.end(), nearer);
      take(placement, std::span<const PoolEntry>(scratch.data(), static_cast<std::size_t>(params.tau_upper)));
    }
    out.push_back(std::move(placement));
  }
  return out;
}

// ---------------------------------------------------------------- attack

std::vector<ObservedSignal> observe_signals(std::span<const DroneRecord> fleet, const Position& observer,
                                            const SignalRangeTable& table) {
  std::vector<ObservedSignal> out;
  for (const auto& d : fleet) {
    if (d.kind == DroneKind::Leader || !d.on_air()) continue;
    const double dist = std::max(distance(d.pos, observer), table.ref_distance);
    const Dbm sg = received_power(d.tx_power, dist, table);
    const auto band = classify_received(sg, table);
    if (band) out.push_back(ObservedSignal{d.id, sg, band});
  }
  return out;
}

AttackOutcome resolve_attack(StrategyIndex strategy, std::span<const DroneRecord> fleet,
                             const Position& attacker_pos, const AttackParams& params,
                             const SignalRangeTable& table, Rng& rng) {
  AttackOutcome outcome;
  outcome.strategy = strategy;
  if (params.zeta <= 0) return outcome;

  std::vector<ObservedSignal> candidates;
  for (const auto& s : observe_signals(fleet, attacker_pos, table)) {
    if (s.band && *s.band == strategy) candidates.push_back(s);
  }
  std::sort(candidates.begin(), candidates.end(), [](const ObservedSignal& a, const ObservedSignal& b) {
    return a.received.value > b.received.value || (a.received.value == b.received.value && a.drone_id < b.drone_id);
  });
  if (candidates.size() > static_cast<std::size_t>(params.zeta)) {
    candidates.resize(static_cast<std::size_t>(params.zeta));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& c : candidates) {
    outcome.targets.push_back(c.drone_id);
    const auto it = std::find_if(fleet.begin(), fleet.end(), [&](const DroneRecord& d) { return d.id == c.drone_id; });
    if (it->kind == DroneKind::Honey) {
      if (params.hd_detect_prob >= 1.0 || unit(rng) < params.hd_detect_prob) ++outcome.alerts;
    } else if (unit(rng) < it->vul) {
      outcome.compromised.push_back(it->id);
    }
  }
  return outcome;
}

void apply_attack(const AttackOutcome& outcome, std::span<DroneRecord> fleet) {
  for (auto& d : fleet) {
    if (d.kind != DroneKind::Mission) continue;
    if (std::find(outcome.compromised.begin(), outcome.compromised.end(), d.id) != outcome.compromised.end()) {
      d.status = DroneStatus::Compromised;
      d.assigned_cell.reset();
    } else if (std::find(outcome.zombified.begin(), outcome.zombified.end(), d.id) != outcome.zombified.end()) {
      d.status = DroneStatus::Zombie;
      d.contained = true;
      d.assigned_cell.reset();
    }
  }
}

// ---------------------------------------------------------------- energy

double md_round_cost(int level_index, const EnergyParams& p) {
  return p.platform_mw + p.camera_mw + p.radio_mw * level_index / 10.0;
}

double hd_round_cost(int level_index, const EnergyParams& p) {
  return p.platform_mw + p.radio_mw * level_index / 10.0;
}

double consume_energy(std::span<DroneRecord> fleet, StrategyIndex defense_level, const EnergyParams& params) {
  double spent = 0.0;
  const double threshold = params.threshold_frac * params.capacity;
  for (auto& d : fleet) {
    if (d.kind == DroneKind::Leader) continue;
    if (d.status == DroneStatus::Charging) {
      if (--d.charge_timer <= 0) {
        d.charge_timer = 0;
        d.battery = params.capacity;
        d.status = d.contained ? DroneStatus::Zombie : DroneStatus::Active;
      }
      continue;
    }
    double cost = 0.0;
    if (d.kind == DroneKind::Mission && d.on_air()) {
      cost = md_round_cost(d.level_index, params);
    } else if (d.kind == DroneKind::Honey && d.status == DroneStatus::Active) {
      cost = hd_round_cost(defense_level.value(), params);
    } else {
      continue;
    }
    cost = std::min(cost, d.battery);
    d.battery -= cost;
    spent += cost;
    if (d.battery <= 0.0) {
      d.status = DroneStatus::Crashed;
      d.assigned_cell.reset();
    } else if (d.battery < threshold) {
      d.status = DroneStatus::Charging;
      d.charge_timer = params.charge_rounds;
      d.assigned_cell.reset();
    }
  }
  return spent;
}

// ---------------------------------------------------------------- connectivity

Connectivity active_connected(std::span<const DroneRecord> fleet, const SignalRangeTable& table) {
  const std::size_t n = fleet.size();
  std::vector<double> reach(n, 0.0);
  std::vector<char> eligible(n, 0);
  std::size_t root = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = fleet[i];
    if (d.kind == DroneKind::Leader) {
      root = i;
      eligible[i] = 1;
    } else {
      eligible[i] = d.on_air() ? 1 : 0;
    }
    if (eligible[i]) reach[i] = range_radius(d.tx_power, table);
  }
  Connectivity result;
  if (root == n) return result;

  std::vector<char> seen(n, 0);
  std::vector<std::size_t> frontier{root};
  seen[root] = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.back();
    frontier.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      if (seen[v] || !eligible[v]) continue;
      if (distance(fleet[u].pos, fleet[v].pos) <= std::min(reach[u], reach[v])) {
        seen[v] = 1;
        frontier.push_back(v);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] && i != root) result.members.push_back(fleet[i].id);
  }
  std::sort(result.members.begin(), result.members.end());
  result.count = static_cast<int>(result.members.size());
  return result;
}

}  // namespace hdsim
