#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdsim/hypergame.hpp"
#include "hdsim/learning.hpp"
#include "hdsim/mitigation.hpp"
#include "hdsim/world.hpp"

namespace hdsim {

enum class SelectorKind { Fixed, HT, DRL, HTDRL };
enum class FleetMode { WithHDs, NoHDs };

[[nodiscard]] const char* to_string(SelectorKind kind);

struct DefenseScheme {
  std::string name;
  SelectorKind selector = SelectorKind::Fixed;
  int fixed_level = 10;
  FleetMode fleet = FleetMode::WithHDs;
  Mitigation mitigation = Mitigation::HoneyAbsorb;
};

struct AttackScheme {
  std::string name;
  SelectorKind selector = SelectorKind::Fixed;
  int fixed_range = 10;
};

/// "HD-F", "HD-HT", "HD-DRL", "HD-HT-DRL", "IDS", "CD", "NoDefense".
[[nodiscard]] DefenseScheme parse_defense_scheme(std::string_view name, int fixed_level = 10);
/// "A-Fixed", "A-HT", "A-DRL", "A-HT-DRL".
[[nodiscard]] AttackScheme parse_attack_scheme(std::string_view name, int fixed_range = 10);
[[nodiscard]] const std::vector<std::string>& defense_scheme_names();
[[nodiscard]] const std::vector<std::string>& attack_scheme_names();

/// Applies a defence scheme's fleet mode and mitigation to a world config.
void configure_world(WorldConfig& world, const DefenseScheme& scheme);

struct AgentParams {
  HypergameParams hypergame{};
  AgentConfig drl{};
  /// Train once per round when the memory holds a batch.
  bool train = true;
};

/// Defender strategy selector. Owns whatever state its selector needs and
/// keeps it across episodes.
class DefenderAgent {
 public:
  DefenderAgent(DefenseScheme scheme, AgentParams params, int state_dim, Rng& rng,
                std::optional<ApdFilter> filter = std::nullopt);

  void begin_episode(Rng& rng);
  /// Picks DS_j for the coming round.
  StrategyIndex select(const World& world, Rng& rng);
  /// Learns from the finished round; `world` is the post-round state.
  void observe(const World& world, const RoundReport& report, Rng& rng);
  void end_episode();

  [[nodiscard]] const DefenseScheme& scheme() const { return scheme_; }
  [[nodiscard]] const HypergameContext* hypergame() const { return ht_.get(); }
  [[nodiscard]] const ActorCriticAgent* learner() const { return drl_.get(); }
  [[nodiscard]] ActorCriticAgent* mutable_learner() { return drl_.get(); }

 private:
  DefenseScheme scheme_;
  AgentParams params_;
  std::unique_ptr<HypergameContext> ht_;
  std::unique_ptr<ActorCriticAgent> drl_;
  std::vector<double> last_state_;
  StrategyIndex last_action_{};
};

class AttackerAgent {
 public:
  AttackerAgent(AttackScheme scheme, AgentParams params, Rng& rng, std::optional<ApdFilter> filter = std::nullopt);

  void begin_episode(Rng& rng);
  StrategyIndex select(const AttackerObservation& view, Rng& rng);
  void observe(const RoundReport& report, Rng& rng);
  /// Flushes the pending transition as terminal.
  void end_episode(Rng& rng);

  [[nodiscard]] const AttackScheme& scheme() const { return scheme_; }
  [[nodiscard]] const HypergameContext* hypergame() const { return ht_.get(); }
  [[nodiscard]] const ActorCriticAgent* learner() const { return drl_.get(); }

 private:
  void flush(const std::vector<double>& next_state, bool done, Rng& rng);

  AttackScheme scheme_;
  AgentParams params_;
  std::unique_ptr<HypergameContext> ht_;
  std::unique_ptr<ActorCriticAgent> drl_;
  // Next state is only seen at the next selection, so transitions wait here.
  std::optional<Transition> pending_;
  std::vector<double> last_state_;
  StrategyIndex last_action_{};
};

/// Dispatch for one defender turn; pure routing to the agent's selector.
StrategyIndex select_defense(DefenderAgent& agent, const World& world, Rng& rng);

}  // namespace hdsim
