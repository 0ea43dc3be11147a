#include "hdsim/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hdsim {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ApdFilter ApdFilter::uniform() {
  ApdFilter f;
  f.weights.fill(1.0 / kNumStrategies);
  return f;
}

ApdFilter ApdFilter::from_counts(std::span<const double> counts) {
  if (counts.size() != static_cast<std::size_t>(kNumStrategies)) {
    throw std::invalid_argument("ApdFilter: expected 10 counts");
  }
  ApdFilter f;
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0.0) throw std::invalid_argument("ApdFilter: counts must be non-negative");
    f.weights[k] = (counts[k] + 1.0) / (total + kNumStrategies);
  }
  return f;
}

std::array<double, kNumStrategies> ApdFilter::floored() const {
  std::array<double, kNumStrategies> w{};
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::max(weights[k], epsilon);
  return w;
}

std::vector<double> apply_filter(std::span<const double> probs, const ApdFilter& filter) {
  if (probs.size() != static_cast<std::size_t>(kNumStrategies)) {
    throw std::invalid_argument("apply_filter: expected 10 probabilities");
  }
  const auto w = filter.floored();
  std::vector<double> out(probs.size());
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = probs[k] * w[k];
    total += out[k];
  }
  if (!(total > 0.0)) return {probs.begin(), probs.end()};
  for (auto& v : out) v /= total;
  return out;
}

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double hi = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    p[k] = std::exp(z[k] - hi);
    total += p[k];
  }
  for (auto& v : p) v /= total;
  return p;
}

// Filtered policy for one column plus the chain factor d(effective logit)/dz.
std::vector<double> filtered_column(std::span<const double> z, const ApdFilter* filter, std::vector<double>* chain) {
  if (chain) chain->assign(z.size(), 1.0);
  if (!filter) return softmax(z);
  if (filter->domain == FilterDomain::Logit) {
    const auto w = filter->floored();
    std::vector<double> scaled(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) scaled[k] = w[k] * z[k];
    if (chain) chain->assign(w.begin(), w.end());
    return softmax(scaled);
  }
  return apply_filter(softmax(z), *filter);
}

}  // namespace

std::vector<double> filtered_policy(std::span<const double> logits, const ApdFilter* filter) {
  return filtered_column(logits, filter, nullptr);
}

std::vector<double> encode_attacker_state(std::span<const ObservedSignal> signals) {
  std::vector<double> s(kNumStrategies, 0.0);
  for (const auto& sig : signals) {
    if (sig.band) s[sig.band->slot()] += 1.0;
  }
  return s;
}

std::vector<double> encode_defender_state(const GridMap& grid) {
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(grid.cell_count()) + 1);
  s.push_back(static_cast<double>(grid.completed_count()) / grid.cell_count());
  const auto map = grid.progress_map();
  s.insert(s.end(), map.begin(), map.end());
  return s;
}

// ---------------------------------------------------------------- losses

double critic_loss_and_grad(const Mlp& critic, const MatrixXd& states, std::span<const double> targets,
                            std::span<const double> weights, VectorXd* grad, std::vector<double>* td,
                            Rng* dropout_rng) {
  const auto batch = static_cast<std::size_t>(states.cols());
  if (targets.size() != batch || weights.size() != batch) {
    throw std::invalid_argument("critic loss: batch sizes differ");
  }
  Mlp::Cache cache;
  const MatrixXd v = critic.forward_train(states, cache, dropout_rng);
  MatrixXd g(1, states.cols());
  double loss = 0.0;
  if (td) td->resize(batch);
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const double delta = targets[b] - v(0, static_cast<Eigen::Index>(b));
    if (td) (*td)[b] = delta;
    loss += weights[b] * delta * delta * inv_b;
    g(0, static_cast<Eigen::Index>(b)) = -2.0 * weights[b] * delta * inv_b;
  }
  if (grad) *grad = critic.backward(cache, g);
  return loss;
}

double actor_loss_and_grad(const Mlp& actor, const MatrixXd& states, std::span<const int> actions,
                           std::span<const double> advantages, std::span<const double> weights,
                           const ApdFilter* filter, double entropy_coef, VectorXd* grad, Rng* dropout_rng) {
  const auto batch = static_cast<std::size_t>(states.cols());
  if (actions.size() != batch || advantages.size() != batch || weights.size() != batch) {
    throw std::invalid_argument("actor loss: batch sizes differ");
  }
  Mlp::Cache cache;
  const MatrixXd logits = actor.forward_train(states, cache, dropout_rng);
  MatrixXd g = MatrixXd::Zero(logits.rows(), logits.cols());
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch);
  std::vector<double> chain;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    const VectorXd z = logits.col(col);
    const auto q = filtered_column(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), filter,
                                   &chain);
    const auto a = static_cast<std::size_t>(actions[b]);
    const double scale = weights[b] * advantages[b] * inv_b;
    loss -= scale * std::log(std::max(q[a], 1e-300));
    double entropy = 0.0;
    for (double p : q) {
      if (p > 0.0) entropy -= p * std::log(p);
    }
    loss -= entropy_coef * entropy * inv_b;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double indicator = k == a ? 1.0 : 0.0;
      double dz = -scale * (indicator - q[k]);
      if (entropy_coef != 0.0 && q[k] > 0.0) {
        // dH/du_k = -q_k (log q_k + H) for effective logits u.
        dz += entropy_coef * inv_b * q[k] * (std::log(q[k]) + entropy);
      }
      g(static_cast<Eigen::Index>(k), col) = dz * chain[k];
    }
  }
  if (grad) *grad = actor.backward(cache, g);
  return loss;
}

// ---------------------------------------------------------------- agent

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

ActorCriticAgent::ActorCriticAgent(AgentConfig config, Rng& rng, std::optional<ApdFilter> filter)
    : config_(std::move(config)),
      actor_(layer_sizes(config_.state_dim, config_.hidden, kNumStrategies), rng, config_.net),
      critic_(layer_sizes(config_.state_dim, config_.hidden, 1), rng, config_.net),
      actor_opt_(actor_.parameter_count()),
      critic_opt_(critic_.parameter_count()),
      filter_(filter),
      memory_(config_.capacity, config_.alpha, config_.priority_eps),
      lr_(config_.lr) {
  if (config_.batch_size == 0) throw std::invalid_argument("AgentConfig: batch_size must be positive");
  if (config_.lr_decay_every < 1) throw std::invalid_argument("AgentConfig: lr_decay_every must be >= 1");
  if (!(config_.gamma >= 0.0 && config_.gamma <= 1.0)) throw std::invalid_argument("AgentConfig: gamma in [0,1]");
}

std::vector<double> ActorCriticAgent::probs(std::span<const double> state) const {
  const Eigen::Map<const VectorXd> x(state.data(), static_cast<Eigen::Index>(state.size()));
  const MatrixXd logits = actor_.forward(x);
  return filtered_policy(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())),
                         filter_ ? &*filter_ : nullptr);
}

StrategyIndex ActorCriticAgent::sample_index(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cumulative += probs[k];
    if (u < cumulative) return StrategyIndex{static_cast<int>(k) + 1};
  }
  // u beyond the rounded total: last action with positive mass.
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k] > 0.0) return StrategyIndex{static_cast<int>(k) + 1};
  }
  return StrategyIndex{1};
}

StrategyIndex ActorCriticAgent::act(std::span<const double> state, Rng& rng, bool evaluate) const {
  const auto p = probs(state);
  if (evaluate) {
    return StrategyIndex{static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) + 1};
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return sample_index(p, unit(rng));
}

void ActorCriticAgent::remember(Transition t) {
  if (t.state.size() != static_cast<std::size_t>(config_.state_dim) ||
      t.next_state.size() != static_cast<std::size_t>(config_.state_dim)) {
    throw std::invalid_argument("remember: state dimension mismatch");
  }
  if (t.action < 0 || t.action >= kNumStrategies) throw std::out_of_range("remember: action slot out of range");
  memory_.add(std::move(t));
}

double ActorCriticAgent::beta() const {
  const double frac =
      config_.beta_anneal_episodes > 0
          ? std::min(1.0, static_cast<double>(episodes_) / config_.beta_anneal_episodes)
          : 1.0;
  return config_.beta_start + (config_.beta_end - config_.beta_start) * frac;
}

std::optional<TrainLosses> ActorCriticAgent::train_step(Rng& rng) {
  if (memory_.size() < config_.batch_size) return std::nullopt;
  const auto sample = memory_.sample(config_.batch_size, beta(), rng);
  const auto batch = static_cast<Eigen::Index>(sample.indices.size());
  const auto dim = static_cast<Eigen::Index>(config_.state_dim);

  MatrixXd states(dim, batch);
  MatrixXd next(dim, batch);
  std::vector<int> actions(sample.indices.size());
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& t = memory_.at(sample.indices[static_cast<std::size_t>(b)]);
    states.col(b) = Eigen::Map<const VectorXd>(t.state.data(), dim);
    next.col(b) = Eigen::Map<const VectorXd>(t.next_state.data(), dim);
    actions[static_cast<std::size_t>(b)] = t.action;
  }

  const MatrixXd v_next = critic_.forward(next);
  std::vector<double> targets(sample.indices.size());
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& t = memory_.at(sample.indices[static_cast<std::size_t>(b)]);
    targets[static_cast<std::size_t>(b)] = t.reward + (t.done ? 0.0 : config_.gamma * v_next(0, b));
  }

  TrainLosses losses;
  VectorXd grad;
  std::vector<double> td;
  losses.critic = critic_loss_and_grad(critic_, states, targets, sample.weights, &grad, &td, &rng);
  clip_global_norm(grad, config_.grad_clip);
  critic_opt_.step(critic_.mutable_params(), grad, lr_);

  losses.actor = actor_loss_and_grad(actor_, states, actions, td, sample.weights, filter_ ? &*filter_ : nullptr,
                                     config_.entropy_coef, &grad, &rng);
  clip_global_norm(grad, config_.grad_clip);
  actor_opt_.step(actor_.mutable_params(), grad, lr_);

  for (std::size_t b = 0; b < td.size(); ++b) memory_.update_priority(sample.indices[b], td[b]);
  return losses;
}

void ActorCriticAgent::end_episode() {
  ++episodes_;
  if (episodes_ % config_.lr_decay_every == 0) lr_ *= config_.lr_decay;
}

// ---------------------------------------------------------------- snapshot

namespace {

void write_sizes(std::ostream& out, const char* name, const std::vector<int>& sizes) {
  out << name << ' ' << sizes.size();
  for (int s : sizes) out << ' ' << s;
  out << '\n';
}

std::vector<int> read_sizes(std::istream& in, const std::string& name) {
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != name) throw std::runtime_error("snapshot: expected '" + name + "' line");
  std::vector<int> sizes(n);
  for (auto& s : sizes) {
    if (!(in >> s)) throw std::runtime_error("snapshot: truncated '" + name + "' line");
  }
  return sizes;
}

double read_number(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::runtime_error("snapshot: truncated number list");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw std::runtime_error("snapshot: bad number '" + token + "'");
  return v;
}

void write_params(std::ostream& out, const char* name, const VectorXd& p) {
  out << "params " << name << ' ' << p.size() << '\n';
  std::ostringstream line;
  line << std::hexfloat;
  for (Eigen::Index k = 0; k < p.size(); ++k) line << p[k] << '\n';
  out << line.str();
}

void read_params(std::istream& in, const std::string& name, VectorXd& p) {
  std::string tag;
  std::string which;
  Eigen::Index n = 0;
  if (!(in >> tag >> which >> n) || tag != "params" || which != name) {
    throw std::runtime_error("snapshot: expected 'params " + name + "'");
  }
  if (n != p.size()) throw std::runtime_error("snapshot: parameter count mismatch for " + name);
  for (Eigen::Index k = 0; k < n; ++k) p[k] = read_number(in);
}

}  // namespace

void ActorCriticAgent::save(std::ostream& out) const {
  out << "hdsim-actor-critic 1\n";
  write_sizes(out, "actor", actor_.sizes());
  write_sizes(out, "critic", critic_.sizes());
  std::ostringstream meta;
  meta << std::hexfloat;
  if (filter_) {
    meta << "filter " << (filter_->domain == FilterDomain::Logit ? "logit" : "probability") << ' '
         << filter_->epsilon;
    for (double w : filter_->weights) meta << ' ' << w;
  } else {
    meta << "filter none";
  }
  meta << "\nlr " << lr_ << " episodes " << episodes_ << '\n';
  out << meta.str();
  write_params(out, "actor", actor_.params());
  write_params(out, "critic", critic_.params());
}

void ActorCriticAgent::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "hdsim-actor-critic" || version != 1) {
    throw std::runtime_error("snapshot: not an hdsim actor-critic snapshot");
  }
  if (read_sizes(in, "actor") != actor_.sizes() || read_sizes(in, "critic") != critic_.sizes()) {
    throw std::runtime_error("snapshot: layer shapes differ from this agent");
  }
  std::string tag;
  std::string domain;
  if (!(in >> tag >> domain) || tag != "filter") throw std::runtime_error("snapshot: expected 'filter'");
  if (domain == "none") {
    filter_.reset();
  } else {
    ApdFilter f;
    f.domain = domain == "logit" ? FilterDomain::Logit : FilterDomain::Probability;
    f.epsilon = read_number(in);
    for (auto& w : f.weights) w = read_number(in);
    filter_ = f;
  }
  std::string lr_tag;
  std::string ep_tag;
  if (!(in >> lr_tag) || lr_tag != "lr") throw std::runtime_error("snapshot: expected 'lr'");
  lr_ = read_number(in);
  if (!(in >> ep_tag >> episodes_) || ep_tag != "episodes") throw std::runtime_error("snapshot: expected 'episodes'");
  read_params(in, "actor", actor_.mutable_params());
  read_params(in, "critic", critic_.mutable_params());
}

}  // namespace hdsim
