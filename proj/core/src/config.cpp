#include "hdsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace hdsim {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that sits outside double quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

std::vector<std::string> split_list(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(unquote(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view raw, const std::string& key) {
  const std::string text = unquote(raw);
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != last) throw ConfigError(key + ": expected a number, got '" + text + "'");
  } else {
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
      throw ConfigError(key + ": expected an integer, got '" + text + "'");
    }
  }
  return value;
}

bool parse_bool(std::string_view raw, const std::string& key) {
  const std::string text = unquote(raw);
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

struct KeySpec {
  std::function<void(ExperimentConfig&, std::string_view, const std::string&)> set;
  std::function<json(const ExperimentConfig&)> get;
};

template <typename T>
KeySpec number_key(T ExperimentConfig::*field) {
  return {[field](ExperimentConfig& c, std::string_view v, const std::string& k) { c.*field = parse_number<T>(v, k); },
          [field](const ExperimentConfig& c) { return json(c.*field); }};
}

template <typename T, typename Get>
KeySpec nested_number(Get access) {
  return {[access](ExperimentConfig& c, std::string_view v, const std::string& k) { access(c) = parse_number<T>(v, k); },
          [access](const ExperimentConfig& c) { return json(access(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Get>
KeySpec nested_bool(Get access) {
  return {[access](ExperimentConfig& c, std::string_view v, const std::string& k) { access(c) = parse_bool(v, k); },
          [access](const ExperimentConfig& c) { return json(access(const_cast<ExperimentConfig&>(c))); }};
}

#define HDS_NUM(T, expr) nested_number<T>([](ExperimentConfig& c) -> T& { return expr; })
#define HDS_BOOL(expr) nested_bool([](ExperimentConfig& c) -> bool& { return expr; })

const std::map<std::string, KeySpec>& registry() {
  static const std::map<std::string, KeySpec> keys = [] {
    std::map<std::string, KeySpec> k;
    // [world]
    k["world.grid_width"] = HDS_NUM(int, c.world.grid_width);
    k["world.grid_height"] = HDS_NUM(int, c.world.grid_height);
    k["world.cell_size"] = HDS_NUM(double, c.world.cell_size);
    k["world.scan_units_per_cell"] = HDS_NUM(int, c.world.scan_units_per_cell);
    k["world.mission_drones"] = HDS_NUM(int, c.world.mission_drones);
    k["world.honey_drones"] = HDS_NUM(int, c.world.honey_drones);
    k["world.spare_mission_drones"] = HDS_NUM(int, c.world.spare_mission_drones);
    k["world.drone_altitude"] = HDS_NUM(double, c.world.drone_altitude);
    k["world.leader_altitude"] = HDS_NUM(double, c.world.leader_altitude);
    k["world.leader_tx_dbm"] = HDS_NUM(double, c.world.leader_tx_dbm);
    k["world.max_rounds"] = HDS_NUM(int, c.world.max_rounds);
    k["world.vul_min"] = HDS_NUM(double, c.world.vul_min);
    k["world.vul_max"] = HDS_NUM(double, c.world.vul_max);
    k["world.rho"] = HDS_NUM(double, c.world.rho);
    k["world.eta"] = HDS_NUM(double, c.world.eta);
    k["world.scan_requires_link"] = HDS_BOOL(c.world.scan_requires_link);
    k["world.hd_follow_assigned"] = HDS_BOOL(c.world.hd_follow_assigned);
    k["world.hd_detect_prob"] = HDS_NUM(double, c.world.hd_detect_prob);
    k["world.ids_detect_prob"] = HDS_NUM(double, c.world.ids_detect_prob);
    k["world.rho_mode"] = KeySpec{
        [](ExperimentConfig& c, std::string_view v, const std::string& key) {
          const auto s = unquote(v);
          if (s == "dbm") {
            c.world.rho_mode = RhoMode::Dbm;
          } else if (s == "index") {
            c.world.rho_mode = RhoMode::Index;
          } else {
            throw ConfigError(key + ": expected dbm or index, got '" + s + "'");
          }
        },
        [](const ExperimentConfig& c) { return json(c.world.rho_mode == RhoMode::Dbm ? "dbm" : "index"); }};
    k["world.attacker_position"] = KeySpec{
        [](ExperimentConfig& c, std::string_view v, const std::string& key) {
          const auto parts = split_list(v);
          if (parts.size() != 3) throw ConfigError(key + ": expected x, y, z");
          c.world.attacker_pos = Position{parse_number<double>(parts[0], key), parse_number<double>(parts[1], key),
                                          parse_number<double>(parts[2], key)};
        },
        [](const ExperimentConfig& c) {
          const auto p = c.world.resolved_attacker_pos();
          return json::array({p.x, p.y, p.z});
        }};
    // [energy]
    k["energy.platform_mw"] = HDS_NUM(double, c.world.energy.platform_mw);
    k["energy.camera_mw"] = HDS_NUM(double, c.world.energy.camera_mw);
    k["energy.radio_mw"] = HDS_NUM(double, c.world.energy.radio_mw);
    k["energy.capacity"] = HDS_NUM(double, c.world.energy.capacity);
    k["energy.threshold_frac"] = HDS_NUM(double, c.world.energy.threshold_frac);
    k["energy.charge_rounds"] = HDS_NUM(int, c.world.energy.charge_rounds);
    // [deployment]
    k["deployment.tau_lower"] = HDS_NUM(int, c.world.deployment.tau_lower);
    k["deployment.tau_upper"] = HDS_NUM(int, c.world.deployment.tau_upper);
    k["deployment.relocation_candidates"] = HDS_NUM(int, c.world.deployment.relocation_candidates);
    // [attack]
    k["attack.zeta"] = HDS_NUM(int, c.world.zeta);
    k["attack.fixed_range"] = number_key(&ExperimentConfig::fixed_attack_range);
    k["attack.lambda"] = HDS_NUM(double, c.attacker_ht.lambda);
    k["attack.ad_min"] = HDS_NUM(double, c.attacker_ht.ad_min);
    k["attack.ad_max"] = HDS_NUM(double, c.attacker_ht.ad_max);
    // [defense]
    k["defense.fixed_level"] = number_key(&ExperimentConfig::fixed_defense_level);
    k["defense.lambda"] = HDS_NUM(double, c.defender_ht.lambda);
    k["defense.subgame_include_nine"] = HDS_BOOL(c.defender_ht.defender_include_nine);
    k["defense.memory_window"] = HDS_NUM(int, c.defender_ht.memory_window);
    // [learning]
    k["learning.lr"] = HDS_NUM(double, c.drl.lr);
    k["learning.lr_decay"] = HDS_NUM(double, c.drl.lr_decay);
    k["learning.lr_decay_every"] = HDS_NUM(int, c.drl.lr_decay_every);
    k["learning.gamma"] = HDS_NUM(double, c.drl.gamma);
    k["learning.grad_clip"] = HDS_NUM(double, c.drl.grad_clip);
    k["learning.batch_size"] = HDS_NUM(std::size_t, c.drl.batch_size);
    k["learning.capacity"] = HDS_NUM(std::size_t, c.drl.capacity);
    k["learning.alpha"] = HDS_NUM(double, c.drl.alpha);
    k["learning.beta_start"] = HDS_NUM(double, c.drl.beta_start);
    k["learning.beta_end"] = HDS_NUM(double, c.drl.beta_end);
    k["learning.beta_anneal_episodes"] = HDS_NUM(int, c.drl.beta_anneal_episodes);
    k["learning.entropy_coef"] = HDS_NUM(double, c.drl.entropy_coef);
    k["learning.dropout"] = HDS_NUM(double, c.drl.net.dropout);
    k["learning.layer_norm"] = HDS_BOOL(c.drl.net.layer_norm);
    k["experiment.warmup_episodes"] = number_key(&ExperimentConfig::warmup_episodes);
    k["learning.filter_epsilon"] = number_key(&ExperimentConfig::filter_epsilon);
    k["learning.hidden"] = KeySpec{
        [](ExperimentConfig& c, std::string_view v, const std::string&) { c.drl.hidden = parse_int_list(v); },
        [](const ExperimentConfig& c) { return json(c.drl.hidden); }};
    k["learning.filter_domain"] = KeySpec{
        [](ExperimentConfig& c, std::string_view v, const std::string& key) {
          const auto s = unquote(v);
          if (s == "probability") {
            c.filter_domain = FilterDomain::Probability;
          } else if (s == "logit") {
            c.filter_domain = FilterDomain::Logit;
          } else {
            throw ConfigError(key + ": expected probability or logit, got '" + s + "'");
          }
        },
        [](const ExperimentConfig& c) {
          return json(c.filter_domain == FilterDomain::Probability ? "probability" : "logit");
        }};
    // [experiment]
    k["experiment.episodes"] = number_key(&ExperimentConfig::episodes);
    k["experiment.threads"] = number_key(&ExperimentConfig::threads);
    k["experiment.metric_gamma"] = number_key(&ExperimentConfig::metric_gamma);
    k["experiment.out"] = KeySpec{[](ExperimentConfig& c, std::string_view v, const std::string&) { c.out_dir = unquote(v); },
                                  [](const ExperimentConfig& c) { return json(c.out_dir); }};
    k["experiment.seeds"] = KeySpec{
        [](ExperimentConfig& c, std::string_view v, const std::string&) { c.seeds = parse_seed_list(v); },
        [](const ExperimentConfig& c) { return json(c.seeds); }};
    k["experiment.defenses"] = KeySpec{
        [](ExperimentConfig& c, std::string_view v, const std::string&) { c.defenses = parse_string_list(v); },
        [](const ExperimentConfig& c) { return json(c.defenses); }};
    k["experiment.attacks"] = KeySpec{
        [](ExperimentConfig& c, std::string_view v, const std::string&) { c.attacks = parse_string_list(v); },
        [](const ExperimentConfig& c) { return json(c.attacks); }};
    return k;
  }();
  return keys;
}

#undef HDS_NUM
#undef HDS_BOOL

}  // namespace

ConfigDocument parse_config_text(std::string_view text) {
  ConfigDocument doc;
  std::string section = "experiment";
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(where + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    const std::string full = section + "." + std::string(key);
    if (doc.values.count(full)) throw ConfigError(where + "duplicate key '" + full + "'");
    doc.values[full] = std::string(value);
    doc.lines[full] = line_no;
  }
  return doc;
}

ConfigDocument read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentConfig experiment_from_document(const ConfigDocument& doc, ExperimentConfig base) {
  const auto& keys = registry();
  for (const auto& [key, value] : doc.values) {
    const auto it = keys.find(key);
    const auto line = doc.lines.count(key) ? "line " + std::to_string(doc.lines.at(key)) + ": " : std::string{};
    if (it == keys.end()) throw ConfigError(line + "unknown key '" + key + "'");
    try {
      it->second.set(base, value, key);
    } catch (const ConfigError& e) {
      throw ConfigError(line + e.what());
    }
  }
  return base;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  try {
    return experiment_from_document(read_config_file(path));
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + msg);
  }
}

std::vector<std::uint64_t> parse_seed_list(std::string_view csv) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split_list(csv)) out.push_back(parse_number<std::uint64_t>(part, "seeds"));
  if (out.empty()) throw ConfigError("seeds: empty list");
  return out;
}

std::vector<int> parse_int_list(std::string_view csv) {
  std::vector<int> out;
  for (const auto& part : split_list(csv)) out.push_back(parse_number<int>(part, "list"));
  return out;
}

std::vector<std::string> parse_string_list(std::string_view csv) {
  auto out = split_list(csv);
  for (auto& s : out) s = std::string(trim(s));
  if (out.empty()) throw ConfigError("expected a non-empty list");
  return out;
}

void apply_seed_override(ExperimentConfig& config) {
  if (const char* env = std::getenv("HDS_SEED"); env && *env) config.seeds = parse_seed_list(env);
}

std::string config_to_json(const ExperimentConfig& config) {
  json j = json::object();
  for (const auto& [key, spec] : registry()) {
    const auto dot = key.find('.');
    j[key.substr(0, dot)][key.substr(dot + 1)] = spec.get(config);
  }
  return j.dump(2);
}

std::vector<std::string> known_config_keys() {
  std::vector<std::string> out;
  for (const auto& [key, spec] : registry()) out.push_back(key);
  return out;
}

}  // namespace hdsim
