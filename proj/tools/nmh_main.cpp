// nmh: experiment harness for the marginal / pseudo-marginal / noisy
// Metropolis-Hastings toolkit.
//
//   nmh run --preset fig1 --out out/
//   nmh run --config cfg.json --out out/
//   nmh classify --preset prop3 --M 30000
//   nmh classify --csv table.csv
//   nmh verify prop2 --seed 7 [--json]
//   nmh list-presets
//   nmh simulate-data --T 50 --out data.csv

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nmh/diagnostics.hpp"
#include "nmh/presets.hpp"
#include "nmh/verify.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"marginal / pseudo-marginal / noisy Metropolis-Hastings toolkit"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "run a preset or config-driven experiment");
  std::string run_preset, run_config, run_out = "out";
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  int run_workers = 0;
  run->add_option("--preset", run_preset, "preset name (see list-presets)");
  run->add_option("--config", run_config, "config JSON (or an emitted manifest)");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--seed", run_seed, "override the config seed")
      ->each([&](const std::string&) { run_seed_set = true; });
  run->add_option("--workers", run_workers, "worker pool size for replicate chains");
  bool run_gnuplot = false;
  run->add_flag("--gnuplot", run_gnuplot, "also emit a gnuplot script");

  // --- classify ---
  auto* classify_cmd =
      app.add_subcommand("classify", "classify a birth-death chain");
  std::string cls_preset, cls_csv;
  long cls_M = 30000;
  double cls_tol = 1e-12;
  int cls_N = 1;
  classify_cmd->add_option("--preset", cls_preset, "named birth-death source");
  classify_cmd->add_option("--csv", cls_csv, "user table with columns m,p,q");
  classify_cmd->add_option("--M", cls_M, "series truncation");
  classify_cmd->add_option("--tol", cls_tol, "convergence tolerance");
  classify_cmd->add_option("--N", cls_N, "weight-average size for presets");

  // --- verify ---
  auto* verify_cmd =
      app.add_subcommand("verify", "run a named numerical verification");
  std::string verify_id;
  std::uint64_t verify_seed = 7;
  bool verify_json = false;
  verify_cmd->add_option("id", verify_id, "verification id")->required();
  verify_cmd->add_option("--seed", verify_seed, "base seed");
  verify_cmd->add_flag("--json", verify_json, "machine-readable output");

  // --- list-presets ---
  auto* list_cmd = app.add_subcommand("list-presets", "list run/classify/verify names");

  // --- simulate-data ---
  auto* sim_cmd = app.add_subcommand(
      "simulate-data", "simulate a linear-Gaussian observation series");
  int sim_T = 50;
  std::uint64_t sim_seed = 20240601;
  std::string sim_out = "data.csv";
  nmh::LgssmParams sim_params;
  sim_cmd->add_option("--T", sim_T, "series length");
  sim_cmd->add_option("--seed", sim_seed, "data seed");
  sim_cmd->add_option("--out", sim_out, "output CSV path");
  sim_cmd->add_option("--x0", sim_params.x0, "initial state");
  sim_cmd->add_option("--a", sim_params.a, "autoregression");
  sim_cmd->add_option("--sigma-x2", sim_params.sigma_x2, "state noise variance");
  sim_cmd->add_option("--sigma-y2", sim_params.sigma_y2, "observation noise variance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      nmh::ExperimentConfig cfg;
      if (!run_preset.empty()) {
        cfg = nmh::preset(run_preset);
      } else if (!run_config.empty()) {
        std::ifstream in(run_config);
        if (!in) throw std::runtime_error("cannot open " + run_config);
        json j = json::parse(in);
        // Accept either a bare config or a manifest that embeds one.
        cfg = nmh::ExperimentConfig::from_json(j.contains("config") ? j["config"] : j);
      } else {
        std::cerr << "run: need --preset or --config\n";
        return 2;
      }
      if (run_seed_set) cfg.seed = run_seed;
      if (run_workers > 0) cfg.workers = run_workers;
      if (run_gnuplot) cfg.emit_gnuplot = true;
      auto outputs = nmh::run_experiment(cfg, run_out);
      for (const auto& f : outputs.files) std::cout << f.string() << "\n";
      return 0;
    }

    if (*classify_cmd) {
      nmh::BirthDeathSpec spec;
      if (!cls_preset.empty()) {
        spec = nmh::classify_preset(cls_preset, cls_N).spec;
      } else if (!cls_csv.empty()) {
        std::ifstream in(cls_csv);
        if (!in) throw std::runtime_error("cannot open " + cls_csv);
        spec = nmh::birth_death_from_csv(in);
      } else {
        std::cerr << "classify: need --preset or --csv\n";
        return 2;
      }
      auto cls = nmh::classify(spec, cls_M, cls_tol);
      std::cout << cls.summary() << "\n";
      return 0;
    }

    if (*verify_cmd) {
      if (!nmh::is_verify_id(verify_id)) {
        std::cerr << "unknown verify id '" << verify_id << "'; known ids:\n";
        for (const auto& id : nmh::verify_ids()) std::cerr << "  " << id << "\n";
        return 2;
      }
      auto report = nmh::run_verify(verify_id, {verify_seed});
      if (verify_json)
        std::cout << report.to_json().dump(2) << "\n";
      else
        std::cout << report.summary();
      return report.pass ? 0 : 1;
    }

    if (*list_cmd) {
      std::cout << "run presets:\n";
      for (const auto& name : nmh::preset_names()) std::cout << "  " << name << "\n";
      std::cout << "classify presets:\n";
      for (const auto& name : nmh::classify_preset_names())
        std::cout << "  " << name << "\n";
      std::cout << "verify ids:\n";
      for (const auto& name : nmh::verify_ids()) std::cout << "  " << name << "\n";
      return 0;
    }

    if (*sim_cmd) {
      nmh::RngStream rng(sim_seed, 0);
      auto path = nmh::simulate_lgssm(sim_params, sim_T, rng);
      std::ofstream out(sim_out);
      nmh::write_series_csv(out, path.obs);
      std::ofstream side(sim_out + ".params.json");
      side << nmh::lgssm_params_json(sim_params).dump(2) << "\n";
      std::cout << sim_out << "\n" << sim_out << ".params.json\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
