#include "hdsim/defenses.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace hdsim {

const char* to_string(Mitigation m) {
  switch (m) {
    case Mitigation::HoneyAbsorb: return "HoneyAbsorb";
    case Mitigation::Ids: return "IDS";
    case Mitigation::ContainerDrone: return "ContainerDrone";
    case Mitigation::None: return "None";
  }
  return "?";
}

AttackOutcome mitigate(Mitigation mitigation, double detect_prob, AttackOutcome outcome,
                       std::span<const DroneRecord> fleet, Rng& rng) {
  (void)fleet;
  switch (mitigation) {
    case Mitigation::HoneyAbsorb:
    case Mitigation::None:
      return outcome;
    case Mitigation::Ids: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<int> kept;
      for (int id : outcome.compromised) {
        if (!(unit(rng) < detect_prob)) kept.push_back(id);
      }
      outcome.compromised = std::move(kept);
      return outcome;
    }
    case Mitigation::ContainerDrone:
      outcome.zombified.insert(outcome.zombified.end(), outcome.compromised.begin(), outcome.compromised.end());
      outcome.compromised.clear();
      return outcome;
  }
  return outcome;
}

const char* to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::Fixed: return "Fixed";
    case SelectorKind::HT: return "HT";
    case SelectorKind::DRL: return "DRL";
    case SelectorKind::HTDRL: return "HT-DRL";
  }
  return "?";
}

const std::vector<std::string>& defense_scheme_names() {
  static const std::vector<std::string> names{"HD-HT-DRL", "HD-DRL", "HD-HT", "HD-F", "IDS", "CD", "NoDefense"};
  return names;
}

const std::vector<std::string>& attack_scheme_names() {
  static const std::vector<std::string> names{"A-Fixed", "A-HT", "A-DRL", "A-HT-DRL"};
  return names;
}

DefenseScheme parse_defense_scheme(std::string_view name, int fixed_level) {
  (void)StrategyIndex{fixed_level};
  DefenseScheme s;
  s.name = std::string(name);
  s.fixed_level = fixed_level;
  if (name == "HD-F") {
    s.selector = SelectorKind::Fixed;
  } else if (name == "HD-HT") {
    s.selector = SelectorKind::HT;
  } else if (name == "HD-DRL") {
    s.selector = SelectorKind::DRL;
  } else if (name == "HD-HT-DRL") {
    s.selector = SelectorKind::HTDRL;
  } else if (name == "IDS" || name == "CD" || name == "NoDefense") {
    s.selector = SelectorKind::Fixed;
    s.fleet = FleetMode::NoHDs;
    s.mitigation = name == "IDS" ? Mitigation::Ids : name == "CD" ? Mitigation::ContainerDrone : Mitigation::None;
  } else {
    throw std::invalid_argument("unknown defense scheme '" + std::string(name) + "'");
  }
  return s;
}

AttackScheme parse_attack_scheme(std::string_view name, int fixed_range) {
  (void)StrategyIndex{fixed_range};
  AttackScheme s;
  s.name = std::string(name);
  s.fixed_range = fixed_range;
  if (name == "A-Fixed") {
    s.selector = SelectorKind::Fixed;
  } else if (name == "A-HT") {
    s.selector = SelectorKind::HT;
  } else if (name == "A-DRL") {
    s.selector = SelectorKind::DRL;
  } else if (name == "A-HT-DRL") {
    s.selector = SelectorKind::HTDRL;
  } else {
    throw std::invalid_argument("unknown attack scheme '" + std::string(name) + "'");
  }
  return s;
}

void configure_world(WorldConfig& world, const DefenseScheme& scheme) {
  if (scheme.fleet == FleetMode::NoHDs) world.honey_drones = 0;
  world.mitigation = scheme.mitigation;
}

// ---------------------------------------------------------------- defender

namespace {

bool uses_ht(SelectorKind k) { return k == SelectorKind::HT; }
bool uses_drl(SelectorKind k) { return k == SelectorKind::DRL || k == SelectorKind::HTDRL; }

}  // namespace

DefenderAgent::DefenderAgent(DefenseScheme scheme, AgentParams params, int state_dim, Rng& rng,
                             std::optional<ApdFilter> filter)
    : scheme_(std::move(scheme)), params_(std::move(params)) {
  if (uses_ht(scheme_.selector)) ht_ = std::make_unique<HypergameContext>(Role::Defender, params_.hypergame);
  if (uses_drl(scheme_.selector)) {
    if (scheme_.selector == SelectorKind::HTDRL && !filter) {
      throw std::invalid_argument("HT-DRL defender needs an APD filter");
    }
    AgentConfig cfg = params_.drl;
    cfg.state_dim = state_dim;
    drl_ = std::make_unique<ActorCriticAgent>(cfg, rng,
                                              scheme_.selector == SelectorKind::HTDRL ? filter : std::nullopt);
  }
}

void DefenderAgent::begin_episode(Rng& rng) {
  if (ht_) ht_->begin_episode(rng);
}

StrategyIndex DefenderAgent::select(const World& world, Rng& rng) {
  switch (scheme_.selector) {
    case SelectorKind::Fixed:
      last_action_ = StrategyIndex{scheme_.fixed_level};
      break;
    case SelectorKind::HT: {
      std::array<int, kNumStrategies> connect{};
      for (int j = 1; j <= kNumStrategies; ++j) {
        connect[static_cast<std::size_t>(j - 1)] = world.hypothetical_connected(StrategyIndex{j});
      }
      std::map<int, double> vul_of;
      for (const auto& d : world.fleet()) vul_of[d.id] = d.vul;
      last_action_ = ht_->select_strategy(connect, world.initial_team_size(), vul_of, rng);
      break;
    }
    case SelectorKind::DRL:
    case SelectorKind::HTDRL:
      last_state_ = encode_defender_state(world.grid());
      last_action_ = drl_->act(last_state_, rng);
      break;
  }
  return last_action_;
}

void DefenderAgent::observe(const World& world, const RoundReport& report, Rng& rng) {
  if (ht_) ht_->observe_as_defender(report.attack);
  if (drl_) {
    Transition t;
    t.state = last_state_;
    t.action = static_cast<int>(last_action_.slot());
    t.reward = report.tasks_completed;
    t.next_state = encode_defender_state(world.grid());
    t.done = world.terminated();
    drl_->remember(std::move(t));
    if (params_.train) drl_->train_step(rng);
  }
}

void DefenderAgent::end_episode() {
  if (drl_) drl_->end_episode();
}

StrategyIndex select_defense(DefenderAgent& agent, const World& world, Rng& rng) { return agent.select(world, rng); }

// ---------------------------------------------------------------- attacker

AttackerAgent::AttackerAgent(AttackScheme scheme, AgentParams params, Rng& rng, std::optional<ApdFilter> filter)
    : scheme_(std::move(scheme)), params_(std::move(params)) {
  if (uses_ht(scheme_.selector)) ht_ = std::make_unique<HypergameContext>(Role::Attacker, params_.hypergame);
  if (uses_drl(scheme_.selector)) {
    if (scheme_.selector == SelectorKind::HTDRL && !filter) {
      throw std::invalid_argument("HT-DRL attacker needs an APD filter");
    }
    AgentConfig cfg = params_.drl;
    cfg.state_dim = kNumStrategies;
    drl_ = std::make_unique<ActorCriticAgent>(cfg, rng,
                                              scheme_.selector == SelectorKind::HTDRL ? filter : std::nullopt);
  }
}

void AttackerAgent::begin_episode(Rng& rng) {
  if (ht_) ht_->begin_episode(rng);
  pending_.reset();
}

void AttackerAgent::flush(const std::vector<double>& next_state, bool done, Rng& rng) {
  if (!pending_ || !drl_) return;
  pending_->next_state = next_state;
  pending_->done = done;
  drl_->remember(std::move(*pending_));
  pending_.reset();
  if (params_.train) drl_->train_step(rng);
}

StrategyIndex AttackerAgent::select(const AttackerObservation& view, Rng& rng) {
  switch (scheme_.selector) {
    case SelectorKind::Fixed:
      last_action_ = StrategyIndex{scheme_.fixed_range};
      break;
    case SelectorKind::HT:
      last_action_ = ht_->select_strategy(view.signals, rng);
      break;
    case SelectorKind::DRL:
    case SelectorKind::HTDRL: {
      auto state = encode_attacker_state(view.signals);
      flush(state, false, rng);
      last_state_ = std::move(state);
      last_action_ = drl_->act(last_state_, rng);
      break;
    }
  }
  return last_action_;
}

void AttackerAgent::observe(const RoundReport& report, Rng& rng) {
  (void)rng;
  if (ht_) ht_->observe_as_attacker(report.attacker_view.signals, report.attack);
  if (drl_) {
    Transition t;
    t.state = last_state_;
    t.action = static_cast<int>(last_action_.slot());
    t.reward = report.tasks_not_completed();
    pending_ = std::move(t);
  }
}

void AttackerAgent::end_episode(Rng& rng) {
  if (pending_) flush(last_state_, true, rng);
  if (drl_) drl_->end_episode();
}

}  // namespace hdsim
