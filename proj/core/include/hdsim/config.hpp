#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hdsim/experiment.hpp"

namespace hdsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file contents keyed "section.key" -> raw value text.
///
/// Grammar, one statement per line:
///   # comment            (also allowed after a value)
///   [section]
///   key = value
/// A value is a bare token, a double-quoted string, or a comma-separated
/// list, optionally wrapped in [ ]. Keys before any section header live in
/// the "experiment" section. Repeating a key is an error.
struct ConfigDocument {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;  // where each key was defined
};

[[nodiscard]] ConfigDocument parse_config_text(std::string_view text);
[[nodiscard]] ConfigDocument read_config_file(const std::filesystem::path& path);

/// Applies every key onto `base`; unknown keys and bad values throw ConfigError.
[[nodiscard]] ExperimentConfig experiment_from_document(const ConfigDocument& doc, ExperimentConfig base = {});
[[nodiscard]] ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// "1,2,3" -> {1,2,3}; throws ConfigError on anything else.
[[nodiscard]] std::vector<std::uint64_t> parse_seed_list(std::string_view csv);
[[nodiscard]] std::vector<int> parse_int_list(std::string_view csv);
[[nodiscard]] std::vector<std::string> parse_string_list(std::string_view csv);

/// Replaces the seed list with HDS_SEED when that variable is set.
void apply_seed_override(ExperimentConfig& config);

/// Every known key with its resolved value.
[[nodiscard]] std::string config_to_json(const ExperimentConfig& config);
[[nodiscard]] std::vector<std::string> known_config_keys();

}  // namespace hdsim
