// hdsim: run honey-drone DoS experiments from a scenario file.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdsim/config.hpp"
#include "hdsim/experiment.hpp"
#include "hdsim/export.hpp"

namespace {

hdsim::ExperimentConfig load(const std::string& path) {
  auto config = hdsim::load_experiment_config(path);
  hdsim::apply_seed_override(config);
  return config;
}

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int k = 0; k < argc; ++k) out += (k ? " " : "") + std::string(argv[k]);
  return out;
}

void print_summary(const hdsim::Dataset& data) {
  // Final-episode means only; the full table is in summary.csv.
  int last = 0;
  for (const auto& m : data.rows) last = std::max(last, m.episode);
  for (const auto& s : hdsim::summarize(data)) {
    if (s.episode != last || s.metric != "r_mc") continue;
    std::printf("%-10s %-9s episode %d  R_MC %.3f +/- %.3f (n=%d)\n", s.scheme.c_str(), s.attack.c_str(), s.episode,
                s.mean, s.stddev, s.n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Honey-drone DoS mitigation simulator"};
  app.set_version_flag("--version", hdsim::version_string());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds_csv;
  std::string scheme;
  std::string attack;
  std::string zeta_csv;

  auto* run = app.add_subcommand("run", "Run every configured defence x attack x seed");
  run->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--seeds", seeds_csv, "Comma-separated seed list");
  auto* scheme_opt = run->add_option("--scheme", scheme, "Single defence scheme");
  auto* attack_opt = run->add_option("--attack", attack, "Single attack scheme");
  scheme_opt->needs(attack_opt);
  attack_opt->needs(scheme_opt);

  auto* sweep = app.add_subcommand("sweep-zeta", "Repeat the run for each attack budget");
  sweep->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--values", zeta_csv, "Comma-separated zeta values")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides the config)");
  sweep->add_option("--seeds", seeds_csv, "Comma-separated seed list");

  auto* validate = app.add_subcommand("validate", "Parse and check a scenario file without running it");
  validate->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = load(config_path);
    if (!seeds_csv.empty()) config.seeds = hdsim::parse_seed_list(seeds_csv);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!scheme.empty()) {
      config.defenses = {scheme};
      config.attacks = {attack};
    }
    config.validate();

    if (*validate) {
      std::cout << hdsim::config_to_json(config) << "\n";
      return 0;
    }

    const auto manifest = hdsim::manifest_json(config, command_line(argc, argv));
    const auto start = std::chrono::steady_clock::now();
    if (*run) {
      const auto data = hdsim::run_experiment(config);
      const auto files = hdsim::export_csv(data, config.out_dir, manifest);
      print_summary(data);
      std::printf("wrote %zu files to %s\n", files.size(), config.out_dir.c_str());
    } else {
      const auto zetas = hdsim::parse_int_list(zeta_csv);
      const auto sweep_data = hdsim::sweep_zeta(config, zetas);
      const auto files = hdsim::export_zeta_sweep(sweep_data, config.out_dir, manifest);
      for (const auto& z : sweep_data) {
        std::printf("zeta %d\n", z.zeta);
        print_summary(z.data);
      }
      std::printf("wrote %zu files to %s\n", files.size(), config.out_dir.c_str());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("elapsed %.1f s\n", secs);
  } catch (const std::exception& e) {
    std::cerr << "hdsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
