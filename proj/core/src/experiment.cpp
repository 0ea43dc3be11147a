#include "hdsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace hdsim {

namespace {

constexpr std::uint64_t kWorldTag = 0x776f726c64ULL;
constexpr std::uint64_t kRoundTag = 0x726f756e64ULL;
constexpr std::uint64_t kAgentTag = 0x6167656e74ULL;
constexpr std::uint64_t kWarmupTag = 0x7761726dULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SelectorKind without_filter(SelectorKind k) { return k == SelectorKind::HTDRL ? SelectorKind::HT : k; }

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a, std::uint64_t tag_b) {
  return splitmix64(splitmix64(splitmix64(base) ^ tag_a) ^ tag_b);
}

std::uint64_t hash_name(const std::string& name) {
  // FNV-1a; stable across platforms, unlike std::hash.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ExperimentConfig::validate() const {
  world.validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(episodes >= 1, "experiment.episodes must be >= 1");
  require(!seeds.empty(), "experiment.seeds must not be empty");
  require(warmup_episodes >= 1, "experiment.warmup_episodes must be >= 1");
  require(threads >= 0, "experiment.threads must be >= 0");
  require(metric_gamma >= 0.0 && metric_gamma <= 1.0, "experiment.metric_gamma must lie in [0,1]");
  require(!defenses.empty() && !attacks.empty(), "experiment.defenses and experiment.attacks must not be empty");
  require(attacker_ht.lambda > 0.0 && defender_ht.lambda > 0.0, "hypergame lambda must be positive");
  require(attacker_ht.ad_min >= 0.0 && attacker_ht.ad_max >= attacker_ht.ad_min, "need 0 <= ad_min <= ad_max");
  require(filter_epsilon >= 0.0, "learning.filter_epsilon must be >= 0");
  require(drl.batch_size >= 1 && drl.capacity >= drl.batch_size, "need 1 <= batch_size <= capacity");
  require(drl.lr > 0.0 && drl.lr_decay > 0.0 && drl.lr_decay_every >= 1, "learning rate schedule must be positive");
  for (const auto& d : defenses) (void)parse_defense_scheme(d, fixed_defense_level);
  for (const auto& a : attacks) (void)parse_attack_scheme(a, fixed_attack_range);
}

WorldConfig scheme_world(const ExperimentConfig& config, const DefenseScheme& scheme) {
  WorldConfig w = config.world;
  configure_world(w, scheme);
  return w;
}

AgentParams defender_params(const ExperimentConfig& config) {
  AgentParams p;
  p.hypergame = config.defender_ht;
  p.hypergame.zeta = config.world.zeta;
  p.drl = config.drl;
  return p;
}

AgentParams attacker_params(const ExperimentConfig& config) {
  AgentParams p;
  p.hypergame = config.attacker_ht;
  p.hypergame.zeta = config.world.zeta;
  p.drl = config.drl;
  return p;
}

EpisodeMetrics run_episode(World& world, DefenderAgent& defender, AttackerAgent& attacker, Rng& rng,
                           double metric_gamma) {
  EpisodeMetrics m;
  m.scheme = defender.scheme().name;
  m.attack = attacker.scheme().name;
  defender.begin_episode(rng);
  attacker.begin_episode(rng);

  const AttackerDecision decide = [&](const AttackerObservation& view) { return attacker.select(view, rng); };
  double discount = 1.0;
  double nac_total = 0.0;
  while (!world.terminated()) {
    const StrategyIndex j = select_defense(defender, world, rng);
    const RoundReport report = world.step_round(j, decide, rng);
    attacker.observe(report, rng);
    defender.observe(world, report, rng);

    RoundRecord r;
    r.t = report.t;
    r.defense = j.value();
    r.attack = report.attack.strategy ? report.attack.strategy->value() : 0;
    r.tasks_completed = report.tasks_completed;
    r.tasks_not_completed = report.tasks_not_completed();
    r.n_active_connected = report.n_active_connected;
    r.energy = report.energy_spent;
    r.targets = static_cast<int>(report.attack.targets.size());
    r.compromised = static_cast<int>(report.attack.compromised.size());
    r.zombified = static_cast<int>(report.attack.zombified.size());
    r.alerts = report.attack.alerts;

    m.ec += r.energy;
    nac_total += r.n_active_connected;
    m.g_d += discount * r.tasks_completed;
    m.g_a += discount * r.tasks_not_completed;
    discount *= metric_gamma;
    m.compromised += r.compromised;
    m.zombified += r.zombified;
    m.alerts += r.alerts;
    ++m.defense_freq[j.slot()];
    if (r.attack > 0) ++m.attack_freq[static_cast<std::size_t>(r.attack - 1)];
    m.round_log.push_back(r);
  }
  attacker.end_episode(rng);
  defender.end_episode();

  m.rounds = static_cast<int>(m.round_log.size());
  m.completed_cells = world.grid().completed_count();
  m.total_cells = world.grid().cell_count();
  m.r_mc = static_cast<double>(m.completed_cells) / m.total_cells;
  m.mean_nac = m.rounds > 0 ? nac_total / m.rounds : 0.0;
  m.termination = world.termination();
  return m;
}

std::array<double, kNumStrategies> collect_ht_choices(const ExperimentConfig& config, Role role,
                                                       const DefenseScheme& defense, const AttackScheme& attack,
                                                       int warmup_episodes, std::uint64_t seed) {
  if (warmup_episodes < 1) throw std::invalid_argument("pretrain_ht_apd: warmup_episodes must be >= 1");
  DefenseScheme d = defense;
  AttackScheme a = attack;
  if (role == Role::Defender) {
    d.selector = SelectorKind::HT;
    a.selector = without_filter(a.selector);
  } else {
    a.selector = SelectorKind::HT;
    d.selector = without_filter(d.selector);
  }
  Rng agent_rng(derive_seed(seed, kWarmupTag, kAgentTag));
  const int state_dim = config.world.grid_width * config.world.grid_height + 1;
  DefenderAgent defender(d, defender_params(config), state_dim, agent_rng);
  AttackerAgent attacker(a, attacker_params(config), agent_rng);

  std::array<double, kNumStrategies> counts{};
  for (int e = 0; e < warmup_episodes; ++e) {
    Rng world_rng(derive_seed(seed, kWarmupTag + static_cast<std::uint64_t>(e), kWorldTag));
    World world(scheme_world(config, d), world_rng);
    Rng round_rng(derive_seed(seed, kWarmupTag + static_cast<std::uint64_t>(e), kRoundTag));
    const auto m = run_episode(world, defender, attacker, round_rng, config.metric_gamma);
    const auto& freq = role == Role::Defender ? m.defense_freq : m.attack_freq;
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += freq[k];
  }
  return counts;
}

ApdFilter pretrain_ht_apd(const ExperimentConfig& config, Role role, const DefenseScheme& defense,
                          const AttackScheme& attack, int warmup_episodes, std::uint64_t seed) {
  const auto counts = collect_ht_choices(config, role, defense, attack, warmup_episodes, seed);
  ApdFilter f = ApdFilter::from_counts(counts);
  f.epsilon = config.filter_epsilon;
  f.domain = config.filter_domain;
  return f;
}

std::vector<EpisodeMetrics> run_seed(const ExperimentConfig& config, const std::string& defense_name,
                                     const std::string& attack_name, std::uint64_t seed) {
  const DefenseScheme defense = parse_defense_scheme(defense_name, config.fixed_defense_level);
  const AttackScheme attack = parse_attack_scheme(attack_name, config.fixed_attack_range);

  std::optional<ApdFilter> defense_filter;
  std::optional<ApdFilter> attack_filter;
  if (defense.selector == SelectorKind::HTDRL) {
    defense_filter = pretrain_ht_apd(config, Role::Defender, defense, attack, config.warmup_episodes, seed);
  }
  if (attack.selector == SelectorKind::HTDRL) {
    attack_filter = pretrain_ht_apd(config, Role::Attacker, defense, attack, config.warmup_episodes, seed);
  }

  Rng agent_rng(derive_seed(seed, kAgentTag, hash_name(defense_name) ^ (hash_name(attack_name) << 1)));
  const int state_dim = config.world.grid_width * config.world.grid_height + 1;
  DefenderAgent defender(defense, defender_params(config), state_dim, agent_rng, defense_filter);
  AttackerAgent attacker(attack, attacker_params(config), agent_rng, attack_filter);

  std::vector<EpisodeMetrics> out;
  out.reserve(static_cast<std::size_t>(config.episodes));
  for (int e = 0; e < config.episodes; ++e) {
    // World layout and round randomness depend only on (seed, episode), so
    // schemes face the same fleets.
    Rng world_rng(derive_seed(seed, static_cast<std::uint64_t>(e), kWorldTag));
    World world(scheme_world(config, defense), world_rng);
    Rng round_rng(derive_seed(seed, static_cast<std::uint64_t>(e), kRoundTag));
    auto m = run_episode(world, defender, attacker, round_rng, config.metric_gamma);
    m.seed = seed;
    m.episode = e;
    out.push_back(std::move(m));
  }
  return out;
}

Dataset run_experiment(const ExperimentConfig& config) {
  config.validate();
  struct Job {
    std::string defense;
    std::string attack;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& d : config.defenses) {
    for (const auto& a : config.attacks) {
      for (auto s : config.seeds) jobs.push_back(Job{d, a, s});
    }
  }
  std::vector<std::vector<EpisodeMetrics>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        results[k] = run_seed(config, jobs[k].defense, jobs[k].attack, jobs[k].seed);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Dataset data;
  for (auto& r : results) {
    for (auto& m : r) data.rows.push_back(std::move(m));
  }
  return data;
}

std::vector<ZetaDataset> sweep_zeta(const ExperimentConfig& config, const std::vector<int>& zeta_values) {
  if (zeta_values.empty()) throw std::invalid_argument("sweep_zeta: no zeta values given");
  for (int z : zeta_values) {
    if (z < 1) throw std::invalid_argument("sweep_zeta: zeta must be >= 1, got " + std::to_string(z));
  }
  std::vector<ZetaDataset> out;
  for (int z : zeta_values) {
    ExperimentConfig c = config;
    c.world.zeta = z;
    out.push_back(ZetaDataset{z, run_experiment(c)});
  }
  return out;
}

std::vector<SummaryRow> summarize(const Dataset& data) {
  using Key = std::tuple<std::string, std::string, int>;
  std::vector<Key> order;
  std::map<Key, std::vector<const EpisodeMetrics*>> groups;
  for (const auto& m : data.rows) {
    Key k{m.scheme, m.attack, m.episode};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(&m);
  }
  // Rows arrive grouped by scheme and attack with episodes ascending, so
  // first-seen key order is already the output order.
  const std::array<std::pair<const char*, double EpisodeMetrics::*>, 5> metrics{{
      {"r_mc", &EpisodeMetrics::r_mc},
      {"ec", &EpisodeMetrics::ec},
      {"n_ac", &EpisodeMetrics::mean_nac},
      {"g_a", &EpisodeMetrics::g_a},
      {"g_d", &EpisodeMetrics::g_d},
  }};
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    for (const auto& [name, field] : metrics) {
      SummaryRow s;
      s.scheme = std::get<0>(key);
      s.attack = std::get<1>(key);
      s.episode = std::get<2>(key);
      s.metric = name;
      s.n = static_cast<int>(rows.size());
      for (const auto* m : rows) s.mean += m->*field;
      s.mean /= s.n;
      if (s.n > 1) {
        double ss = 0.0;
        for (const auto* m : rows) ss += (m->*field - s.mean) * (m->*field - s.mean);
        s.stddev = std::sqrt(ss / (s.n - 1));
      }
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace hdsim
