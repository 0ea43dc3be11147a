#include "hdsim/export.hpp"

#include "hdsim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#ifndef HDSIM_VERSION
#define HDSIM_VERSION "0.0.0"
#endif

namespace hdsim {

namespace fs = std::filesystem;

const char* version_string() { return HDSIM_VERSION; }

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"r_mc", "ec", "n_ac", "g_a", "g_d"};
  return names;
}

double metric_value(const EpisodeMetrics& m, const std::string& metric) {
  if (metric == "r_mc") return m.r_mc;
  if (metric == "ec") return m.ec;
  if (metric == "n_ac") return m.mean_nac;
  if (metric == "g_a") return m.g_a;
  if (metric == "g_d") return m.g_d;
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw ExportError("cannot format number");
  return std::string(buf, ptr);
}

namespace {

// Collects the files it creates so a failed export can clean up after itself.
class FileSet {
 public:
  explicit FileSet(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& body) {
    const auto path = dir_ / name;
    written_.push_back(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ExportError("cannot open " + path.string() + " for writing");
    out << body;
    out.flush();
    if (!out) throw ExportError("write failed for " + path.string());
  }

  void remove_all() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
  }

  [[nodiscard]] const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

std::string key_prefix(const EpisodeMetrics& m) {
  return m.scheme + "," + m.attack + "," + std::to_string(m.seed) + "," + std::to_string(m.episode);
}

void write_dataset(FileSet& files, const Dataset& data, const std::string& manifest) {
  for (const auto& metric : metric_names()) {
    std::string body = "scheme,attack,seed,episode,value\n";
    for (const auto& m : data.rows) body += key_prefix(m) + "," + format_number(metric_value(m, metric)) + "\n";
    files.write(metric + ".csv", body);
  }

  const auto freq_file = [&](const char* name, auto field) {
    std::string body = "scheme,attack,seed,episode,strategy_index,value\n";
    for (const auto& m : data.rows) {
      const auto& freq = m.*field;
      for (std::size_t s = 0; s < freq.size(); ++s) {
        body += key_prefix(m) + "," + std::to_string(s + 1) + "," + std::to_string(freq[s]) + "\n";
      }
    }
    files.write(name, body);
  };
  freq_file("defense_strategy_freq.csv", &EpisodeMetrics::defense_freq);
  freq_file("attack_strategy_freq.csv", &EpisodeMetrics::attack_freq);

  std::string rounds =
      "scheme,attack,seed,episode,t,defense_level,attack_range,tasks_completed,tasks_not_completed,n_ac,energy,"
      "targets,compromised,zombified,alerts\n";
  for (const auto& m : data.rows) {
    for (const auto& r : m.round_log) {
      rounds += key_prefix(m) + "," + std::to_string(r.t) + "," + std::to_string(r.defense) + "," +
                std::to_string(r.attack) + "," + std::to_string(r.tasks_completed) + "," +
                std::to_string(r.tasks_not_completed) + "," + std::to_string(r.n_active_connected) + "," +
                format_number(r.energy) + "," + std::to_string(r.targets) + "," + std::to_string(r.compromised) +
                "," + std::to_string(r.zombified) + "," + std::to_string(r.alerts) + "\n";
    }
  }
  files.write("rounds.csv", rounds);

  std::string episodes =
      "scheme,attack,seed,episode,rounds,completed_cells,total_cells,compromised,zombified,alerts,termination\n";
  for (const auto& m : data.rows) {
    episodes += key_prefix(m) + "," + std::to_string(m.rounds) + "," + std::to_string(m.completed_cells) + "," +
                std::to_string(m.total_cells) + "," + std::to_string(m.compromised) + "," +
                std::to_string(m.zombified) + "," + std::to_string(m.alerts) + "," + to_string(m.termination) + "\n";
  }
  files.write("episodes.csv", episodes);

  std::string summary = "scheme,attack,metric,episode,mean,stddev,n\n";
  for (const auto& s : summarize(data)) {
    summary += s.scheme + "," + s.attack + "," + s.metric + "," + std::to_string(s.episode) + "," +
               format_number(s.mean) + "," + format_number(s.stddev) + "," + std::to_string(s.n) + "\n";
  }
  files.write("summary.csv", summary);
  files.write("manifest.json", manifest + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ExportError("cannot create output directory " + dir.string());
}

}  // namespace

std::vector<fs::path> export_csv(const Dataset& data, const fs::path& dir, const std::string& manifest) {
  ensure_dir(dir);
  FileSet files(dir);
  try {
    write_dataset(files, data, manifest);
  } catch (...) {
    files.remove_all();
    throw;
  }
  return files.written();
}

std::vector<fs::path> export_zeta_sweep(const std::vector<ZetaDataset>& sweep, const fs::path& dir,
                                        const std::string& manifest) {
  ensure_dir(dir);
  FileSet top(dir);
  std::vector<fs::path> all;
  try {
    for (const auto& metric : metric_names()) {
      std::string body = "zeta,scheme,attack,seed,episode,value\n";
      for (const auto& z : sweep) {
        for (const auto& m : z.data.rows) {
          body += std::to_string(z.zeta) + "," + key_prefix(m) + "," + format_number(metric_value(m, metric)) + "\n";
        }
      }
      top.write("zeta_" + metric + ".csv", body);
    }
    top.write("manifest.json", manifest + "\n");
    all = top.written();
    for (const auto& z : sweep) {
      const auto sub = export_csv(z.data, dir / ("zeta_" + std::to_string(z.zeta)), manifest);
      all.insert(all.end(), sub.begin(), sub.end());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : all) fs::remove(p, ec);
    top.remove_all();
    throw;
  }
  return all;
}

std::string manifest_json(const ExperimentConfig& config, const std::string& command) {
  nlohmann::json j;
  j["tool"] = "hdsim";
  j["version"] = version_string();
  j["command"] = command;
  j["config"] = nlohmann::json::parse(config_to_json(config));
  return j.dump(2);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw std::out_of_range("no column '" + name + "'");
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExportError("cannot open " + path.string());
  const auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  CsvTable t;
  std::string line;
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split(line));
  }
  return t;
}

}  // namespace hdsim
