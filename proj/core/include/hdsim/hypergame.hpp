#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hdsim/fleet.hpp"
#include "hdsim/geometry.hpp"

namespace hdsim {

enum class Role { Attacker, Defender };

/// Subgame 0 is the full game; 1..3 are the restricted games.
inline constexpr int kNumSubgames = 4;

using StrategyVector = std::array<double, kNumStrategies>;
using SubgameVector = std::array<double, kNumSubgames>;
using SubgameSets = std::array<std::vector<int>, kNumSubgames - 1>;

/// u[own][opponent], both zero-based slots.
struct UtilityMatrix {
  std::array<StrategyVector, kNumStrategies> values{};

  [[nodiscard]] double operator()(StrategyIndex own, StrategyIndex opp) const {
    return values[own.slot()][opp.slot()];
  }
  [[nodiscard]] std::span<const double> row(StrategyIndex own) const { return values[own.slot()]; }
};

/// Strategy groups matching the attacker's three reception bands.
[[nodiscard]] SubgameSets attacker_subgame_sets();
/// Defender groups; `include_nine` swaps {7,8,10} for {7,8,9,10}.
[[nodiscard]] SubgameSets defender_subgame_sets(bool include_nine = false);

/// Dirichlet pseudo-counts over opponent strategies, one row per subgame.
class BeliefState {
 public:
  explicit BeliefState(SubgameSets sets, double prior = 1.0);

  /// counts[k][observed] += 1, plus the full-game row when k > 0.
  void update_counts(int subgame, StrategyIndex observed);

  [[nodiscard]] const std::vector<int>& subgame_def(int subgame) const { return defs_.at(subgame); }
  [[nodiscard]] const StrategyVector& counts(int subgame) const { return counts_.at(subgame); }
  /// Counts normalized over all ten strategies.
  [[nodiscard]] StrategyVector cms_row(int subgame) const;
  /// Counts renormalized over the subgame's own set, zero elsewhere.
  [[nodiscard]] StrategyVector restricted_row(int subgame) const;

  /// Throws std::invalid_argument unless p is non-negative and sums to 1.
  void set_subgame_probs(const SubgameVector& p);
  [[nodiscard]] const SubgameVector& subgame_probs() const { return probs_; }
  /// S = sum_k P_k * restricted_row(k).
  [[nodiscard]] StrategyVector aggregated() const;

 private:
  std::array<std::vector<int>, kNumSubgames> defs_;
  std::array<StrategyVector, kNumSubgames> counts_{};
  SubgameVector probs_{1.0, 0.0, 0.0, 0.0};
};

/// JSON object with counts, P and S.
[[nodiscard]] std::string belief_snapshot_json(const BeliefState& belief);

struct UncertaintyParams {
  double lambda = 1.0;
  double ad = 1.0;  // detectability; 1 for the defender
  int counter = 0;  // N_AS or N_alert

  [[nodiscard]] double g() const;
};

/// One target the attacker expects to hit with a given strategy.
struct TargetEstimate {
  double asr = 0.0;          // ASR'
  double criticality = 0.0;  // C
};

/// Attacker inputs per strategy: S_target,i as predicted from this round's signals.
struct AttackerUtilityInputs {
  std::array<std::vector<TargetEstimate>, kNumStrategies> targets;
  int zeta = 1;
};

struct DefenderUtilityInputs {
  /// vul of every drone remembered as targeted under attack strategy i.
  std::array<std::vector<double>, kNumStrategies> remembered_vul;
  /// N'_connect,j.
  std::array<int, kNumStrategies> connect_estimate{};
  int n_drone = 1;
  int zeta = 1;
};

struct UtilityTerms {
  double ai = 0.0;
  double ac = 0.0;
  double di = 0.0;
  double dc = 0.0;
};

[[nodiscard]] UtilityTerms attacker_terms(const AttackerUtilityInputs& in, StrategyIndex i, StrategyIndex j);
[[nodiscard]] UtilityTerms defender_terms(const DefenderUtilityInputs& in, StrategyIndex j, StrategyIndex i);
/// (ai + dc) - (di + ac).
[[nodiscard]] double attacker_utility(const AttackerUtilityInputs& in, StrategyIndex i, StrategyIndex j);
/// (di + ac) - (ai + dc).
[[nodiscard]] double defender_utility(const DefenderUtilityInputs& in, StrategyIndex j, StrategyIndex i);

[[nodiscard]] UtilityMatrix attacker_utility_matrix(const AttackerUtilityInputs& in);
[[nodiscard]] UtilityMatrix defender_utility_matrix(const DefenderUtilityInputs& in);

/// Criticality of a drone seen at `received`: (sg + 100) / 120.
[[nodiscard]] double criticality(Dbm received);

/// Observed drone share per band group; (1,0,0,0) when gated or nothing seen.
[[nodiscard]] SubgameVector subgame_probs_attacker(const BeliefState& belief, std::span<const ObservedSignal> signals,
                                                   bool gated);
/// Shift-and-normalize of sum_{j in B_k} sum_i c_ki u_ji; (1,0,0,0) when gated.
[[nodiscard]] SubgameVector subgame_probs_defender(const BeliefState& belief, const UtilityMatrix& utility,
                                                   bool gated);

/// Worst-case opponent slot for one utility row; ties go to the lowest slot.
[[nodiscard]] std::size_t worst_response(std::span<const double> utility_row);

/// (1-g) * sum_j S_j u_j + g * m * S_w * u_w with m = |S|.
[[nodiscard]] double heu(std::span<const double> belief, std::span<const double> utility_row, double g);

/// Zero-based argmax of heu over the rows of `utility`; ties go to the lowest row.
[[nodiscard]] std::size_t best_heu_row(std::span<const std::vector<double>> utility, std::span<const double> belief,
                                       double g);
[[nodiscard]] StrategyIndex best_heu_strategy(const UtilityMatrix& utility, const StrategyVector& belief, double g);

struct HypergameParams {
  int zeta = 5;
  double lambda = 0.5;
  double ad_min = 0.0;
  double ad_max = 0.5;
  bool defender_include_nine = false;
  /// Remembered target sets per attack strategy; 0 keeps the full history.
  int memory_window = 0;
};

/// Single-owner hypergame state for one player. Counts persist across
/// episodes; per-mission accumulators reset with begin_episode.
class HypergameContext {
 public:
  HypergameContext(Role role, HypergameParams params);

  [[nodiscard]] Role role() const { return role_; }
  [[nodiscard]] const HypergameParams& params() const { return params_; }
  [[nodiscard]] const BeliefState& belief() const { return belief_; }
  [[nodiscard]] BeliefState& mutable_belief() { return belief_; }
  [[nodiscard]] const UtilityMatrix& utility() const { return utility_; }
  [[nodiscard]] const UncertaintyParams& uncertainty() const { return uncertainty_; }
  [[nodiscard]] UncertaintyParams& mutable_uncertainty() { return uncertainty_; }
  [[nodiscard]] int last_subgame() const { return last_subgame_; }
  [[nodiscard]] bool last_gated() const { return last_gated_; }
  static constexpr int sig_max = kNumStrategies;

  /// Resets per-mission history and (attacker) redraws ad.
  void begin_episode(Rng& rng);

  /// Attacker turn: builds utilities from this round's signals and picks a band.
  StrategyIndex select_strategy(std::span<const ObservedSignal> signals, Rng& rng);
  /// Defender turn: `vul_of` maps drone id to vulnerability.
  StrategyIndex select_strategy(const std::array<int, kNumStrategies>& connect_estimate, int n_drone,
                                const std::map<int, double>& vul_of, Rng& rng);

  /// Attacker learning: infers DS_j from the strongest signal and scores ASR'.
  void observe_as_attacker(std::span<const ObservedSignal> signals, const AttackOutcome& outcome);
  /// Defender learning: only rounds with alerts reveal the attack strategy.
  void observe_as_defender(const AttackOutcome& outcome);

  /// ASR' with Laplace smoothing: (successes + 1) / (attempts + 2).
  [[nodiscard]] double asr(int drone_id) const;
  [[nodiscard]] AttackerUtilityInputs attacker_inputs(std::span<const ObservedSignal> signals) const;
  [[nodiscard]] DefenderUtilityInputs defender_inputs(const std::array<int, kNumStrategies>& connect_estimate,
                                                      int n_drone, const std::map<int, double>& vul_of) const;
  /// Union of the remembered target ids for attack strategy i.
  [[nodiscard]] std::vector<int> remembered_targets(StrategyIndex i) const;

 private:
  StrategyIndex finish_selection(const SubgameVector& p, double g);
  bool draw_gate(Rng& rng);

  Role role_;
  HypergameParams params_;
  BeliefState belief_;
  UtilityMatrix utility_{};
  UncertaintyParams uncertainty_{};
  int last_subgame_ = 0;
  bool last_gated_ = true;

  struct AttackRecord {
    int attempts = 0;
    int successes = 0;
  };
  std::map<int, AttackRecord> attack_history_;
  std::array<std::vector<std::vector<int>>, kNumStrategies> target_memory_;
};

}  // namespace hdsim
