// Experiment harness: named presets, config-driven runs, reproducible data
// outputs.  Every run emits a manifest echoing the fully-resolved config;
// re-running from that manifest reproduces byte-identical CSV outputs.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmh/discrete_walk.hpp"
#include "nmh/hmm_smc.hpp"

namespace nmh {

struct PmmhConfig {
  LgssmParams true_params{1.0, 0.9, 1.0, 1.0};
  int T = 50;
  std::uint64_t data_seed = 20240601;
  std::vector<double> step_sd = {0.6, 0.12, 0.6, 0.6};
  ParamBox x0_box{-5.0, 5.0};
  ParamBox a_box{-1.0, 1.0};
  ParamBox sigma_x2_box{0.01, 10.0};
  ParamBox sigma_y2_box{0.01, 10.0};

  nlohmann::json to_json() const;
  static PmmhConfig from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
  std::string id = "custom";
  std::string target = "geometric";  // geometric | std_normal | pmmh
  double theta = 0.5;                // integer-walk up probability
  double walk_var = 4.0;             // gaussian-walk step variance
  nlohmann::json weights = {{"family", "unit"}};
  std::vector<std::string> kernels = {"marginal"};
  std::vector<int> N_values = {1};
  long iterations = 100000;
  long burnin = 0;
  long thin = 1;
  std::uint64_t seed = 7;
  int replicates = 1;
  int workers = 1;
  double x0 = 1.0;
  std::vector<std::string> diagnostics = {"acceptance"};
  int tv_bins = 50;
  double tv_lo = -4.0, tv_hi = 4.0;
  int acf_max_lag = 100;
  bool emit_gnuplot = false;  // also write a plot script for the CSV outputs
  std::optional<PmmhConfig> pmmh;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);  // throws on unknown name

// Named birth-death sources for the classify command.
struct ClassifyPreset {
  BirthDeathSpec spec;
  std::string description;
};
std::vector<std::string> classify_preset_names();
ClassifyPreset classify_preset(const std::string& name, int N = 1);

struct RunOutputs {
  std::vector<std::filesystem::path> files;
  nlohmann::json manifest;
  nlohmann::json diagnostics;
};

RunOutputs run_experiment(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir);

const char* version_string();

}  // namespace nmh
