#include "hdsim/hypergame.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace hdsim {

SubgameSets attacker_subgame_sets() {
  // Bands 1-3 end at -93.8 dBm, bands 4-7 at -79.0 dBm.
  return SubgameSets{std::vector<int>{1, 2, 3}, std::vector<int>{4, 5, 6, 7}, std::vector<int>{8, 9, 10}};
}

SubgameSets defender_subgame_sets(bool include_nine) {
  SubgameSets sets{std::vector<int>{1, 2, 3}, std::vector<int>{4, 5, 6}, std::vector<int>{7, 8, 10}};
  if (include_nine) sets[2] = {7, 8, 9, 10};
  return sets;
}

// ---------------------------------------------------------------- BeliefState

BeliefState::BeliefState(SubgameSets sets, double prior) {
  if (!(prior > 0.0)) throw std::invalid_argument("BeliefState: prior must be positive");
  defs_[0].resize(kNumStrategies);
  std::iota(defs_[0].begin(), defs_[0].end(), 1);
  for (int k = 1; k < kNumSubgames; ++k) {
    auto& def = defs_[static_cast<std::size_t>(k)];
    def = std::move(sets[static_cast<std::size_t>(k - 1)]);
    if (def.empty()) throw std::invalid_argument("BeliefState: empty subgame set");
    for (int s : def) (void)StrategyIndex{s};  // range check
  }
  for (auto& row : counts_) row.fill(prior);
}

void BeliefState::update_counts(int subgame, StrategyIndex observed) {
  if (subgame < 0 || subgame >= kNumSubgames) throw std::out_of_range("update_counts: subgame must lie in 0..3");
  counts_[static_cast<std::size_t>(subgame)][observed.slot()] += 1.0;
  if (subgame != 0) counts_[0][observed.slot()] += 1.0;
}

StrategyVector BeliefState::cms_row(int subgame) const {
  StrategyVector row = counts_.at(static_cast<std::size_t>(subgame));
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  for (auto& c : row) c /= total;
  return row;
}

StrategyVector BeliefState::restricted_row(int subgame) const {
  const auto& counts = counts_.at(static_cast<std::size_t>(subgame));
  const auto& def = defs_.at(static_cast<std::size_t>(subgame));
  double total = 0.0;
  for (int s : def) total += counts[static_cast<std::size_t>(s - 1)];
  StrategyVector row{};
  for (int s : def) row[static_cast<std::size_t>(s - 1)] = counts[static_cast<std::size_t>(s - 1)] / total;
  return row;
}

void BeliefState::set_subgame_probs(const SubgameVector& p) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("subgame probabilities must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("subgame probabilities must sum to 1");
  probs_ = p;
}

StrategyVector BeliefState::aggregated() const {
  StrategyVector s{};
  for (int k = 0; k < kNumSubgames; ++k) {
    const double pk = probs_[static_cast<std::size_t>(k)];
    if (pk == 0.0) continue;
    const auto row = restricted_row(k);
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += pk * row[j];
  }
  return s;
}

std::string belief_snapshot_json(const BeliefState& belief) {
  nlohmann::json j;
  j["counts"] = nlohmann::json::array();
  j["subgames"] = nlohmann::json::array();
  for (int k = 0; k < kNumSubgames; ++k) {
    j["counts"].push_back(belief.counts(k));
    j["subgames"].push_back(belief.subgame_def(k));
  }
  j["P"] = belief.subgame_probs();
  j["S"] = belief.aggregated();
  return j.dump();
}

double UncertaintyParams::g() const { return std::exp(-lambda * ad * counter); }

// ---------------------------------------------------------------- utilities

double criticality(Dbm received) { return (received.value + 100.0) / 120.0; }

UtilityTerms attacker_terms(const AttackerUtilityInputs& in, StrategyIndex i, StrategyIndex j) {
  const auto& targets = in.targets[i.slot()];
  UtilityTerms t;
  for (const auto& e : targets) t.ai += e.asr * e.criticality;
  t.ai /= in.zeta;
  t.ac = std::exp(static_cast<double>(targets.size()) - in.zeta);
  t.di = 1.0 - t.ai;
  t.dc = static_cast<double>(j.value()) / HypergameContext::sig_max + t.ai;
  return t;
}

UtilityTerms defender_terms(const DefenderUtilityInputs& in, StrategyIndex j, StrategyIndex i) {
  const auto& remembered = in.remembered_vul[i.slot()];
  const double vul_sum = std::accumulate(remembered.begin(), remembered.end(), 0.0);
  UtilityTerms t;
  t.di = 1.0 - vul_sum / in.zeta + static_cast<double>(in.connect_estimate[j.slot()]) / in.n_drone;
  t.dc = std::exp(static_cast<double>(j.value() - HypergameContext::sig_max));
  t.ai = 1.0 - t.di;
  t.ac = static_cast<double>(remembered.size()) / in.zeta;
  return t;
}

double attacker_utility(const AttackerUtilityInputs& in, StrategyIndex i, StrategyIndex j) {
  const auto t = attacker_terms(in, i, j);
  return (t.ai + t.dc) - (t.di + t.ac);
}

double defender_utility(const DefenderUtilityInputs& in, StrategyIndex j, StrategyIndex i) {
  const auto t = defender_terms(in, j, i);
  return (t.di + t.ac) - (t.ai + t.dc);
}

UtilityMatrix attacker_utility_matrix(const AttackerUtilityInputs& in) {
  UtilityMatrix u;
  for (int i = 1; i <= kNumStrategies; ++i) {
    for (int j = 1; j <= kNumStrategies; ++j) {
      u.values[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
          attacker_utility(in, StrategyIndex{i}, StrategyIndex{j});
    }
  }
  return u;
}

UtilityMatrix defender_utility_matrix(const DefenderUtilityInputs& in) {
  UtilityMatrix u;
  for (int j = 1; j <= kNumStrategies; ++j) {
    for (int i = 1; i <= kNumStrategies; ++i) {
      u.values[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i - 1)] =
          defender_utility(in, StrategyIndex{j}, StrategyIndex{i});
    }
  }
  return u;
}

// ---------------------------------------------------------------- beliefs

SubgameVector subgame_probs_attacker(const BeliefState& belief, std::span<const ObservedSignal> signals, bool gated) {
  SubgameVector p{1.0, 0.0, 0.0, 0.0};
  if (gated) return p;
  int seen = 0;
  SubgameVector counts{};
  for (const auto& s : signals) {
    if (!s.band) continue;
    ++seen;
    for (int k = 1; k < kNumSubgames; ++k) {
      const auto& def = belief.subgame_def(k);
      if (std::find(def.begin(), def.end(), s.band->value()) != def.end()) {
        counts[static_cast<std::size_t>(k)] += 1.0;
        break;
      }
    }
  }
  const double grouped = counts[1] + counts[2] + counts[3];
  if (seen == 0 || grouped == 0.0) return p;
  p[0] = 0.0;
  for (int k = 1; k < kNumSubgames; ++k) p[static_cast<std::size_t>(k)] = counts[static_cast<std::size_t>(k)] / grouped;
  return p;
}

SubgameVector subgame_probs_defender(const BeliefState& belief, const UtilityMatrix& utility, bool gated) {
  SubgameVector p{1.0, 0.0, 0.0, 0.0};
  if (gated) return p;
  std::array<double, kNumSubgames - 1> raw{};
  for (int k = 1; k < kNumSubgames; ++k) {
    const auto c = belief.cms_row(k);
    double score = 0.0;
    for (int j : belief.subgame_def(k)) {
      const auto& row = utility.values[static_cast<std::size_t>(j - 1)];
      for (std::size_t i = 0; i < row.size(); ++i) score += c[i] * row[i];
    }
    raw[static_cast<std::size_t>(k - 1)] = score;
  }
  const double lo = *std::min_element(raw.begin(), raw.end());
  if (lo < 0.0) {
    for (auto& r : raw) r -= lo;
  }
  const double total = raw[0] + raw[1] + raw[2];
  p[0] = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    p[k + 1] = total > 0.0 ? raw[k] / total : 1.0 / 3.0;
  }
  return p;
}

// ---------------------------------------------------------------- HEU

std::size_t worst_response(std::span<const double> utility_row) {
  return static_cast<std::size_t>(std::min_element(utility_row.begin(), utility_row.end()) - utility_row.begin());
}

double heu(std::span<const double> belief, std::span<const double> utility_row, double g) {
  if (belief.size() != utility_row.size() || belief.empty()) {
    throw std::invalid_argument("heu: belief and utility row sizes differ");
  }
  double expected = 0.0;
  for (std::size_t j = 0; j < belief.size(); ++j) expected += belief[j] * utility_row[j];
  const std::size_t w = worst_response(utility_row);
  const double worst = static_cast<double>(belief.size()) * belief[w] * utility_row[w];
  return (1.0 - g) * expected + g * worst;
}

std::size_t best_heu_row(std::span<const std::vector<double>> utility, std::span<const double> belief, double g) {
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t r = 0; r < utility.size(); ++r) {
    const double v = heu(belief, utility[r], g);
    if (r == 0 || v > best_value) {
      best = r;
      best_value = v;
    }
  }
  return best;
}

StrategyIndex best_heu_strategy(const UtilityMatrix& utility, const StrategyVector& belief, double g) {
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t r = 0; r < utility.values.size(); ++r) {
    const double v = heu(belief, utility.values[r], g);
    if (r == 0 || v > best_value) {
      best = r;
      best_value = v;
    }
  }
  return StrategyIndex{static_cast<int>(best) + 1};
}

// ---------------------------------------------------------------- context

HypergameContext::HypergameContext(Role role, HypergameParams params)
    : role_(role),
      params_(params),
      belief_(role == Role::Attacker ? attacker_subgame_sets() : defender_subgame_sets(params.defender_include_nine)) {
  if (params_.zeta < 1) throw std::invalid_argument("HypergameContext: zeta must be >= 1");
  if (!(params_.lambda > 0.0)) throw std::invalid_argument("HypergameContext: lambda must be positive");
  if (params_.ad_min < 0.0 || params_.ad_max < params_.ad_min) {
    throw std::invalid_argument("HypergameContext: need 0 <= ad_min <= ad_max");
  }
  uncertainty_.lambda = params_.lambda;
  uncertainty_.ad = role_ == Role::Attacker ? params_.ad_max : 1.0;
}

void HypergameContext::begin_episode(Rng& rng) {
  uncertainty_.counter = 0;
  if (role_ == Role::Attacker) {
    std::uniform_real_distribution<double> ad(params_.ad_min, params_.ad_max);
    uncertainty_.ad = ad(rng);
  }
  attack_history_.clear();
  for (auto& m : target_memory_) m.clear();
  last_subgame_ = 0;
  last_gated_ = true;
}

bool HypergameContext::draw_gate(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pr = unit(rng);
  last_gated_ = pr < uncertainty_.g();
  return last_gated_;
}

StrategyIndex HypergameContext::finish_selection(const SubgameVector& p, double g) {
  belief_.set_subgame_probs(p);
  last_subgame_ = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  return best_heu_strategy(utility_, belief_.aggregated(), g);
}

double HypergameContext::asr(int drone_id) const {
  const auto it = attack_history_.find(drone_id);
  if (it == attack_history_.end()) return 0.5;
  return (it->second.successes + 1.0) / (it->second.attempts + 2.0);
}

AttackerUtilityInputs HypergameContext::attacker_inputs(std::span<const ObservedSignal> signals) const {
  AttackerUtilityInputs in;
  in.zeta = params_.zeta;
  std::array<std::vector<ObservedSignal>, kNumStrategies> by_band;
  for (const auto& s : signals) {
    if (s.band) by_band[s.band->slot()].push_back(s);
  }
  for (std::size_t b = 0; b < by_band.size(); ++b) {
    auto& group = by_band[b];
    std::sort(group.begin(), group.end(), [](const ObservedSignal& a, const ObservedSignal& c) {
      return a.received.value > c.received.value || (a.received.value == c.received.value && a.drone_id < c.drone_id);
    });
    if (group.size() > static_cast<std::size_t>(params_.zeta)) group.resize(static_cast<std::size_t>(params_.zeta));
    for (const auto& s : group) in.targets[b].push_back(TargetEstimate{asr(s.drone_id), criticality(s.received)});
  }
  return in;
}

std::vector<int> HypergameContext::remembered_targets(StrategyIndex i) const {
  std::set<int> ids;
  for (const auto& round : target_memory_[i.slot()]) ids.insert(round.begin(), round.end());
  return {ids.begin(), ids.end()};
}

DefenderUtilityInputs HypergameContext::defender_inputs(const std::array<int, kNumStrategies>& connect_estimate,
                                                        int n_drone, const std::map<int, double>& vul_of) const {
  DefenderUtilityInputs in;
  in.zeta = params_.zeta;
  in.n_drone = std::max(1, n_drone);
  in.connect_estimate = connect_estimate;
  for (int i = 1; i <= kNumStrategies; ++i) {
    for (int id : remembered_targets(StrategyIndex{i})) {
      const auto it = vul_of.find(id);
      in.remembered_vul[static_cast<std::size_t>(i - 1)].push_back(it == vul_of.end() ? 0.0 : it->second);
    }
  }
  return in;
}

StrategyIndex HypergameContext::select_strategy(std::span<const ObservedSignal> signals, Rng& rng) {
  if (role_ != Role::Attacker) throw std::logic_error("select_strategy: signal observation is the attacker's view");
  const bool gated = draw_gate(rng);
  utility_ = attacker_utility_matrix(attacker_inputs(signals));
  return finish_selection(subgame_probs_attacker(belief_, signals, gated), uncertainty_.g());
}

StrategyIndex HypergameContext::select_strategy(const std::array<int, kNumStrategies>& connect_estimate, int n_drone,
                                                const std::map<int, double>& vul_of, Rng& rng) {
  if (role_ != Role::Defender) throw std::logic_error("select_strategy: connectivity view is the defender's");
  const bool gated = draw_gate(rng);
  utility_ = defender_utility_matrix(defender_inputs(connect_estimate, n_drone, vul_of));
  return finish_selection(subgame_probs_defender(belief_, utility_, gated), uncertainty_.g());
}

void HypergameContext::observe_as_attacker(std::span<const ObservedSignal> signals, const AttackOutcome& outcome) {
  const auto strongest = std::max_element(signals.begin(), signals.end(), [](const auto& a, const auto& b) {
    return a.received.value < b.received.value;
  });
  if (strongest != signals.end() && strongest->band) belief_.update_counts(last_subgame_, *strongest->band);

  for (int id : outcome.targets) {
    auto& rec = attack_history_[id];
    ++rec.attempts;
    if (std::find(outcome.compromised.begin(), outcome.compromised.end(), id) != outcome.compromised.end()) {
      ++rec.successes;
    }
  }
  uncertainty_.counter += static_cast<int>(outcome.compromised.size());
}

void HypergameContext::observe_as_defender(const AttackOutcome& outcome) {
  if (outcome.alerts <= 0 || !outcome.strategy) return;
  belief_.update_counts(last_subgame_, *outcome.strategy);
  auto& memory = target_memory_[outcome.strategy->slot()];
  memory.push_back(outcome.targets);
  if (params_.memory_window > 0 && memory.size() > static_cast<std::size_t>(params_.memory_window)) {
    memory.erase(memory.begin());
  }
  uncertainty_.counter += outcome.alerts;
}

}  // namespace hdsim
