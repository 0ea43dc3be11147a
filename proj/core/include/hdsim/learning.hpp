#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdsim/fleet.hpp"
#include "hdsim/geometry.hpp"
#include "hdsim/nn.hpp"
#include "hdsim/replay.hpp"

namespace hdsim {

enum class FilterDomain {
  Probability,  // reweight softmax output, renormalize
  Logit,        // scale logits before the softmax
};

/// Fixed per-action weights laid over a policy's output.
struct ApdFilter {
  std::array<double, kNumStrategies> weights{};
  double epsilon = 1e-3;
  FilterDomain domain = FilterDomain::Probability;

  [[nodiscard]] static ApdFilter uniform();
  /// Laplace-smoothed frequencies: (count + 1) / (N + 10).
  [[nodiscard]] static ApdFilter from_counts(std::span<const double> counts);
  /// max(w, epsilon) per action.
  [[nodiscard]] std::array<double, kNumStrategies> floored() const;
};

/// Probability-domain filter: p .* max(w, eps), renormalized.
[[nodiscard]] std::vector<double> apply_filter(std::span<const double> probs, const ApdFilter& filter);
/// Filtered policy from raw logits in the filter's domain.
[[nodiscard]] std::vector<double> filtered_policy(std::span<const double> logits, const ApdFilter* filter);

/// Attacker DRL state: drone counts per reception band.
[[nodiscard]] std::vector<double> encode_attacker_state(std::span<const ObservedSignal> signals);
/// Defender DRL state: completion ratio followed by the row-major scan map.
[[nodiscard]] std::vector<double> encode_defender_state(const GridMap& grid);

struct AgentConfig {
  int state_dim = 10;
  std::vector<int> hidden{128, 128, 64, 32};
  Mlp::Options net{};
  double lr = 5e-4;
  double lr_decay = 0.9;
  int lr_decay_every = 20;  // episodes
  double gamma = 0.99;
  double grad_clip = 1.0;
  std::size_t batch_size = 32;
  std::size_t capacity = 10'000;
  double alpha = 0.6;
  double beta_start = 0.4;
  double beta_end = 1.0;
  int beta_anneal_episodes = 100;
  double entropy_coef = 0.0;
  double priority_eps = 1e-6;
};

struct TrainLosses {
  double actor = 0.0;
  double critic = 0.0;
};

/// Critic loss (1/B) sum_b w_b (y_b - V(s_b))^2 with y treated as constant.
/// Fills grad with its parameter gradient and td with the TD errors.
double critic_loss_and_grad(const Mlp& critic, const Eigen::MatrixXd& states, std::span<const double> targets,
                            std::span<const double> weights, Eigen::VectorXd* grad, std::vector<double>* td,
                            Rng* dropout_rng = nullptr);
/// Actor loss -(1/B) sum_b w_b A_b log pi_f(a_b | s_b) (minus entropy bonus).
double actor_loss_and_grad(const Mlp& actor, const Eigen::MatrixXd& states, std::span<const int> actions,
                           std::span<const double> advantages, std::span<const double> weights,
                           const ApdFilter* filter, double entropy_coef, Eigen::VectorXd* grad,
                           Rng* dropout_rng = nullptr);

/// One-step advantage actor-critic trained from prioritized replay,
/// optionally behind a fixed APD filter (HT-DRL).
class ActorCriticAgent {
 public:
  ActorCriticAgent(AgentConfig config, Rng& rng, std::optional<ApdFilter> filter = std::nullopt);

  /// Filtered action probabilities (dropout off).
  [[nodiscard]] std::vector<double> probs(std::span<const double> state) const;
  /// Samples from the filtered policy, or takes the argmax in evaluation mode.
  [[nodiscard]] StrategyIndex act(std::span<const double> state, Rng& rng, bool evaluate = false) const;
  /// Inverse-CDF draw at quantile u in [0,1).
  [[nodiscard]] static StrategyIndex sample_index(std::span<const double> probs, double u);

  void remember(Transition t);
  /// Skipped (nullopt) until memory holds a full batch.
  std::optional<TrainLosses> train_step(Rng& rng);
  /// Counts an episode; applies learning-rate decay and beta annealing.
  void end_episode();

  [[nodiscard]] const AgentConfig& config() const { return config_; }
  [[nodiscard]] const Mlp& actor() const { return actor_; }
  [[nodiscard]] const Mlp& critic() const { return critic_; }
  [[nodiscard]] Mlp& mutable_actor() { return actor_; }
  [[nodiscard]] Mlp& mutable_critic() { return critic_; }
  [[nodiscard]] const std::optional<ApdFilter>& filter() const { return filter_; }
  [[nodiscard]] const ReplayMemory& memory() const { return memory_; }
  [[nodiscard]] double learning_rate() const { return lr_; }
  [[nodiscard]] double beta() const;
  [[nodiscard]] int episodes() const { return episodes_; }

  /// Text snapshot: header with layer shapes and filter, then hexfloat parameters.
  void save(std::ostream& out) const;
  /// Throws std::runtime_error when shapes disagree with this agent.
  void load(std::istream& in);

 private:
  AgentConfig config_;
  Mlp actor_;
  Mlp critic_;
  Adam actor_opt_;
  Adam critic_opt_;
  std::optional<ApdFilter> filter_;
  ReplayMemory memory_;
  double lr_;
  int episodes_ = 0;
};

}  // namespace hdsim
