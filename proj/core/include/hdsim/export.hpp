#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdsim/experiment.hpp"

namespace hdsim {

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-episode metric files, in write order.
[[nodiscard]] const std::vector<std::string>& metric_names();
[[nodiscard]] double metric_value(const EpisodeMetrics& m, const std::string& metric);

/// Shortest text that parses back to the same double.
[[nodiscard]] std::string format_number(double v);

/// Writes <metric>.csv for every metric, the two strategy-frequency files,
/// rounds.csv, episodes.csv, summary.csv and manifest.json into `dir`.
/// On failure every file written so far is removed and ExportError is thrown.
std::vector<std::filesystem::path> export_csv(const Dataset& data, const std::filesystem::path& dir,
                                              const std::string& manifest_json);

/// zeta_<metric>.csv with a leading zeta column, plus one export_csv
/// directory per zeta under dir/zeta_<z>.
std::vector<std::filesystem::path> export_zeta_sweep(const std::vector<ZetaDataset>& sweep,
                                                     const std::filesystem::path& dir,
                                                     const std::string& manifest_json);

[[nodiscard]] std::string manifest_json(const ExperimentConfig& config, const std::string& command);
[[nodiscard]] const char* version_string();

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const;
};
/// Plain comma split; the exporter never quotes fields.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

}  // namespace hdsim
