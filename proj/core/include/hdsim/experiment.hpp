#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hdsim/defenses.hpp"
#include "hdsim/hypergame.hpp"
#include "hdsim/learning.hpp"
#include "hdsim/world.hpp"

namespace hdsim {

struct ExperimentConfig {
  WorldConfig world{};
  HypergameParams attacker_ht{};
  HypergameParams defender_ht{.zeta = 5, .lambda = 0.1, .ad_min = 0.0, .ad_max = 0.0};
  AgentConfig drl{};
  FilterDomain filter_domain = FilterDomain::Probability;
  double filter_epsilon = 1e-3;
  int fixed_defense_level = 10;
  int fixed_attack_range = 5;

  std::vector<std::string> defenses{"HD-HT-DRL"};
  std::vector<std::string> attacks{"A-Fixed"};
  int episodes = 1;
  std::vector<std::uint64_t> seeds{1};
  int warmup_episodes = 5;
  /// 0 picks the hardware concurrency.
  int threads = 0;
  std::string out_dir = "out";
  double metric_gamma = 0.99;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

struct RoundRecord {
  int t = 0;
  int defense = 0;
  int attack = 0;
  int tasks_completed = 0;
  int tasks_not_completed = 0;
  int n_active_connected = 0;
  double energy = 0.0;
  int targets = 0;
  int compromised = 0;
  int zombified = 0;
  int alerts = 0;
};

struct EpisodeMetrics {
  std::string scheme;
  std::string attack;
  std::uint64_t seed = 0;
  int episode = 0;
  int rounds = 0;
  double r_mc = 0.0;
  double ec = 0.0;
  double mean_nac = 0.0;
  double g_a = 0.0;
  double g_d = 0.0;
  int compromised = 0;
  int zombified = 0;
  int alerts = 0;
  int completed_cells = 0;
  int total_cells = 0;
  Termination termination = Termination::Running;
  std::array<int, kNumStrategies> defense_freq{};
  std::array<int, kNumStrategies> attack_freq{};
  std::vector<RoundRecord> round_log;
};

struct Dataset {
  std::vector<EpisodeMetrics> rows;
};

/// Sub-stream seed from a base seed and tags (splitmix64 mixing).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a, std::uint64_t tag_b = 0);
[[nodiscard]] std::uint64_t hash_name(const std::string& name);

/// World config for one defence scheme (fleet mode, mitigation, zeta).
[[nodiscard]] WorldConfig scheme_world(const ExperimentConfig& config, const DefenseScheme& scheme);
[[nodiscard]] AgentParams defender_params(const ExperimentConfig& config);
[[nodiscard]] AgentParams attacker_params(const ExperimentConfig& config);

/// Plays one mission to termination with persistent agents.
EpisodeMetrics run_episode(World& world, DefenderAgent& defender, AttackerAgent& attacker, Rng& rng,
                           double metric_gamma = 0.99);

/// Runs the hypergame agent for `role` over warm-up missions and turns its
/// choice counts into filter weights.
[[nodiscard]] ApdFilter pretrain_ht_apd(const ExperimentConfig& config, Role role, const DefenseScheme& defense,
                                        const AttackScheme& attack, int warmup_episodes, std::uint64_t seed);
/// Choice counts only (Laplace smoothing is left to ApdFilter::from_counts).
[[nodiscard]] std::array<double, kNumStrategies> collect_ht_choices(const ExperimentConfig& config, Role role,
                                                                     const DefenseScheme& defense,
                                                                     const AttackScheme& attack, int warmup_episodes,
                                                                     std::uint64_t seed);

/// All episodes for one (defence, attack, seed) triple.
[[nodiscard]] std::vector<EpisodeMetrics> run_seed(const ExperimentConfig& config, const std::string& defense,
                                                   const std::string& attack, std::uint64_t seed);

/// Every defence x attack x seed combination; rows ordered by that nesting.
[[nodiscard]] Dataset run_experiment(const ExperimentConfig& config);

struct ZetaDataset {
  int zeta = 0;
  Dataset data;
};
/// One tagged dataset per zeta, seeds shared. Rejects zeta < 1 and empty lists.
[[nodiscard]] std::vector<ZetaDataset> sweep_zeta(const ExperimentConfig& config, const std::vector<int>& zeta_values);

struct SummaryRow {
  std::string scheme;
  std::string attack;
  std::string metric;
  int episode = 0;
  double mean = 0.0;
  double stddev = 0.0;
  int n = 0;
};
/// Mean and sample stddev across seeds per episode index.
[[nodiscard]] std::vector<SummaryRow> summarize(const Dataset& data);

}  // namespace hdsim
