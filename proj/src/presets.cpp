#include "nmh/presets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "nmh/chain.hpp"
#include "nmh/diagnostics.hpp"
#include "nmh/errors.hpp"

namespace nmh {

using nlohmann::json;
namespace fs = std::filesystem;

const char* version_string() {
#ifdef NMH_VERSION
  return NMH_VERSION;
#else
  return "unknown";
#endif
}

// --- config serialization -----------------------------------------------

json PmmhConfig::to_json() const {
  return json{{"true_params", lgssm_params_json(true_params)},
              {"T", T},
              {"data_seed", data_seed},
              {"step_sd", step_sd},
              {"x0_box", {x0_box.lo, x0_box.hi}},
              {"a_box", {a_box.lo, a_box.hi}},
              {"sigma_x2_box", {sigma_x2_box.lo, sigma_x2_box.hi}},
              {"sigma_y2_box", {sigma_y2_box.lo, sigma_y2_box.hi}}};
}

PmmhConfig PmmhConfig::from_json(const json& j) {
  PmmhConfig c;
  c.true_params = lgssm_params_from_json(j.at("true_params"));
  c.T = j.at("T").get<int>();
  c.data_seed = j.at("data_seed").get<std::uint64_t>();
  c.step_sd = j.at("step_sd").get<std::vector<double>>();
  auto box = [&](const char* key) {
    auto v = j.at(key).get<std::vector<double>>();
    return ParamBox{v.at(0), v.at(1)};
  };
  c.x0_box = box("x0_box");
  c.a_box = box("a_box");
  c.sigma_x2_box = box("sigma_x2_box");
  c.sigma_y2_box = box("sigma_y2_box");
  return c;
}

json ExperimentConfig::to_json() const {
  json j{{"id", id},
         {"target", target},
         {"theta", theta},
         {"walk_var", walk_var},
         {"weights", weights},
         {"kernels", kernels},
         {"N_values", N_values},
         {"iterations", iterations},
         {"burnin", burnin},
         {"thin", thin},
         {"seed", seed},
         {"replicates", replicates},
         {"workers", workers},
         {"x0", x0},
         {"diagnostics", diagnostics},
         {"tv_bins", tv_bins},
         {"tv_lo", tv_lo},
         {"tv_hi", tv_hi},
         {"acf_max_lag", acf_max_lag},
         {"emit_gnuplot", emit_gnuplot}};
  if (pmmh) j["pmmh"] = pmmh->to_json();
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("id", c.id);
  get("target", c.target);
  get("theta", c.theta);
  get("walk_var", c.walk_var);
  if (j.contains("weights")) c.weights = j.at("weights");
  get("kernels", c.kernels);
  get("N_values", c.N_values);
  get("iterations", c.iterations);
  get("burnin", c.burnin);
  get("thin", c.thin);
  get("seed", c.seed);
  get("replicates", c.replicates);
  get("workers", c.workers);
  get("x0", c.x0);
  get("diagnostics", c.diagnostics);
  get("tv_bins", c.tv_bins);
  get("tv_lo", c.tv_lo);
  get("tv_hi", c.tv_hi);
  get("acf_max_lag", c.acf_max_lag);
  get("emit_gnuplot", c.emit_gnuplot);
  if (j.contains("pmmh")) c.pmmh = PmmhConfig::from_json(j.at("pmmh"));
  return c;
}

// --- presets -------------------------------------------------------------

namespace {

// Two-point parameters used by the transient homogeneous presets:
// the run/figure parameterization (theta = 3/4, eps = 2 - sqrt(3),
// b = 2 eps theta/(1-theta)) and the proof parameterization where the
// success probability equals eps itself.
struct TwoPointPreset {
  double theta, eps, b;
};

TwoPointPreset caption_params() {
  double eps = 2.0 - std::sqrt(3.0);
  double theta = 0.75;
  return {theta, eps, 2.0 * eps * theta / (1.0 - theta)};
}

TwoPointPreset proof_params() {
  double eps = 2.0 - std::sqrt(3.0);
  double theta = (1.0 - eps + eps * eps) / (1.0 - eps + 3.0 * eps * eps);
  return {theta, eps, 2.0 * eps * theta / (1.0 - theta)};
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1", "fig7-left", "pmmh", "baseline"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.id = name;
  if (name == "fig1") {
    c.target = "std_normal";
    c.walk_var = 4.0;
    c.weights = json{{"family", "homogeneous_lognormal"},
                     {"params", {{"sigma2", 5.0}}}};
    c.kernels = {"noisy"};
    c.N_values = {10, 100, 1000};
    c.iterations = 100000;
    c.burnin = 0;
    c.x0 = 0.0;
    c.diagnostics = {"acceptance", "tv", "histogram"};
    return c;
  }
  if (name == "fig7-left") {
    auto p = caption_params();
    c.target = "geometric";
    c.theta = p.theta;
    c.weights = json{{"family", "two_point_homogeneous"},
                     {"params", {{"b", p.b}, {"eps", p.eps}}}};
    c.kernels = {"marginal", "pseudo_marginal", "noisy"};
    c.N_values = {1};
    c.iterations = 20000;
    c.x0 = 10.0;
    c.diagnostics = {"acceptance", "classifier"};
    return c;
  }
  if (name == "pmmh") {
    c.target = "pmmh";
    c.kernels = {"marginal", "pseudo_marginal", "noisy"};
    c.N_values = {100};
    c.iterations = 20000;
    c.burnin = 0;
    c.diagnostics = {"acceptance", "acf"};
    c.pmmh = PmmhConfig{};
    return c;
  }
  if (name == "baseline") {
    c.target = "geometric";
    c.theta = 0.5;
    c.weights = json{{"family", "unit"}};
    c.kernels = {"marginal"};
    c.N_values = {1};
    c.iterations = 1000000;
    c.burnin = 10000;
    c.x0 = 1.0;
    c.diagnostics = {"acceptance", "tv"};
    return c;
  }
  throw InvalidSpec("unknown preset '" + name + "'");
}

std::vector<std::string> classify_preset_names() {
  return {"prop2", "prop2-proof", "prop3", "prop6", "prop11", "prop7",
          "prop12", "marginal-geometric"};
}

ClassifyPreset classify_preset(const std::string& name, int N) {
  TargetSpec target = geometric_target();
  if (name == "prop2" || name == "prop2-proof") {
    auto p = name == "prop2" ? caption_params() : proof_params();
    return {noisy_birth_death(target, p.theta,
                              WeightModel::two_point_homogeneous(p.b, p.eps), N),
            "two-point homogeneous weights, theta=" + std::to_string(p.theta)};
  }
  if (name == "prop3") {
    double theta = 0.5;
    double b = 3.0 + std::pow((1.0 - theta) / theta, 3.0);
    return {noisy_birth_death(target, theta,
                              WeightModel::two_point_inhomogeneous(
                                  b, Sequence::three_cycle_decay()),
                              N),
            "two-point three-cycle weights, b=4, theta=0.5"};
  }
  if (name == "prop6" || name == "prop11") {
    return {noisy_birth_death(target, 0.5,
                              WeightModel::binomial_average(
                                  Sequence::identity(), Sequence::reciprocal()),
                              N),
            "binomial-average weights, b_m=m, eps_m=1/m, theta=0.5"};
  }
  if (name == "prop7" || name == "prop12") {
    return {noisy_birth_death(target, 0.5,
                              WeightModel::binomial_average(
                                  Sequence::identity(),
                                  Sequence::three_cycle_decay()),
                              N),
            "binomial-average weights, b_m=m, three-cycle eps, theta=0.5"};
  }
  if (name == "marginal-geometric") {
    return {marginal_birth_death(target, 0.5),
            "marginal chain on the geometric target, theta=0.5"};
  }
  throw InvalidSpec("unknown classify preset '" + name + "'");
}

// --- runner ----------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RunJob {
  std::string kernel;
  int N;
  int replicate;
  std::uint64_t stream_id;
};

struct BuiltModel {
  KernelSpec spec;
  State x0;
  bool discrete = false;
};

BuiltModel build_model(const ExperimentConfig& cfg, const std::string& kernel,
                       int N, const ObservationSeries* pmmh_obs) {
  BuiltModel bm;
  KernelSpec& spec = bm.spec;
  if (kernel == "marginal")
    spec.kind = KernelSpec::Kind::marginal;
  else if (kernel == "pseudo_marginal")
    spec.kind = KernelSpec::Kind::pseudo_marginal;
  else if (kernel == "noisy")
    spec.kind = KernelSpec::Kind::noisy;
  else
    throw InvalidSpec("unknown kernel '" + kernel + "'");
  spec.N = N;

  if (cfg.target == "geometric") {
    spec.target = geometric_target();
    spec.proposal = integer_walk(cfg.theta);
    spec.weights = WeightModel::from_json(cfg.weights);
    bm.x0 = State::integer(static_cast<std::int64_t>(std::llround(cfg.x0)));
    bm.discrete = true;
  } else if (cfg.target == "std_normal") {
    spec.target = std_normal_target();
    spec.proposal = gaussian_walk(cfg.walk_var, 1);
    spec.weights = WeightModel::from_json(cfg.weights);
    bm.x0 = State::scalar(cfg.x0);
  } else if (cfg.target == "pmmh") {
    if (!cfg.pmmh || !pmmh_obs)
      throw InvalidSpec("pmmh target needs a pmmh config block");
    const PmmhConfig& pc = *cfg.pmmh;
    PmmhPrior prior;
    prior.fixed = pc.true_params;
    prior.x0 = pc.x0_box;
    prior.a = pc.a_box;
    prior.sigma_x2 = pc.sigma_x2_box;
    prior.sigma_y2 = pc.sigma_y2_box;
    PmmhSetup setup = pmmh_kernels(prior, pc.step_sd, *pmmh_obs, N);
    if (kernel == "marginal")
      spec = setup.marginal;
    else if (kernel == "pseudo_marginal")
      spec = setup.pseudo_marginal;
    else
      spec = setup.noisy;
    spec.N = N;
    bm.x0 = setup.encode(pc.true_params);
  } else {
    throw InvalidSpec("unknown target '" + cfg.target + "'");
  }
  return bm;
}

void write_trace_csv(const fs::path& path, const ChainTrace& trace, long thin) {
  std::ofstream out(path);
  bool vec = !trace.states.empty() && !trace.states.front().is_integer();
  std::size_t dim = vec ? trace.states.front().as_vector().size() : 1;
  out << "iter";
  if (vec)
    for (std::size_t d = 0; d < dim; ++d) out << ",x" << d;
  else
    out << ",state";
  out << ",accepted";
  if (!trace.carried_weight.empty()) out << ",weight";
  out << "\n";
  for (std::size_t i = 0; i < trace.states.size(); i += static_cast<std::size_t>(thin)) {
    out << i;
    if (vec)
      for (double v : trace.states[i].as_vector()) out << "," << fmt(v);
    else
      out << "," << trace.states[i].as_integer();
    out << "," << (i == 0 ? 0 : (trace.accepted[i - 1] ? 1 : 0));
    if (!trace.carried_weight.empty()) out << "," << fmt(trace.carried_weight[i]);
    out << "\n";
  }
}

}  // namespace

RunOutputs run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  RunOutputs outputs;

  // PMMH data are simulated once per experiment and written next to the
  // traces together with the generating parameters.
  std::optional<ObservationSeries> pmmh_obs;
  if (cfg.target == "pmmh") {
    if (!cfg.pmmh) throw InvalidSpec("pmmh target needs a pmmh config block");
    RngStream data_rng(cfg.pmmh->data_seed, 0);
    pmmh_obs = simulate_lgssm(cfg.pmmh->true_params, cfg.pmmh->T, data_rng).obs;
    fs::path data_path = out_dir / (cfg.id + "_data.csv");
    std::ofstream data_out(data_path);
    write_series_csv(data_out, *pmmh_obs);
    outputs.files.push_back(data_path);
    fs::path truth_path = out_dir / (cfg.id + "_true_params.json");
    std::ofstream(truth_path) << lgssm_params_json(cfg.pmmh->true_params).dump(2)
                              << "\n";
    outputs.files.push_back(truth_path);
  }

  std::vector<RunJob> jobs;
  std::uint64_t sid = 0;
  for (const auto& kernel : cfg.kernels)
    for (int N : cfg.N_values)
      for (int rep = 0; rep < cfg.replicates; ++rep)
        jobs.push_back({kernel, N, rep, sid++});

  std::vector<ChainTrace> traces(jobs.size());
  auto work = [&](std::size_t j) {
    const RunJob& job = jobs[j];
    BuiltModel bm = build_model(cfg, job.kernel, job.N,
                                pmmh_obs ? &*pmmh_obs : nullptr);
    traces[j] = run_chain(bm.spec, bm.x0, cfg.iterations,
                          RngStream(cfg.seed, job.stream_id));
  };
  if (cfg.workers > 1) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    int nworkers = std::min<int>(cfg.workers, static_cast<int>(jobs.size()));
    for (int w = 0; w < nworkers; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < jobs.size();
             j = next.fetch_add(1))
          work(j);
      });
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
  }

  auto has_diag = [&](const char* name) {
    return std::find(cfg.diagnostics.begin(), cfg.diagnostics.end(), name) !=
           cfg.diagnostics.end();
  };

  json diag_records = json::array();
  std::ostringstream tv_table;
  tv_table << "kernel,N,replicate,seed,tv\n";
  bool any_tv = false;

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const RunJob& job = jobs[j];
    const ChainTrace& trace = traces[j];
    std::ostringstream tag;
    tag << cfg.id << "_" << job.kernel << "_N" << job.N << "_rep"
        << job.replicate;

    fs::path trace_path = out_dir / (tag.str() + "_trace.csv");
    write_trace_csv(trace_path, trace, cfg.thin);
    outputs.files.push_back(trace_path);

    json rec{{"experiment", cfg.id},
             {"kernel", job.kernel},
             {"N", job.N},
             {"replicate", job.replicate},
             {"seed", cfg.seed},
             {"stream", job.stream_id}};
    if (has_diag("acceptance")) rec["mean_acceptance"] = mean_acceptance(trace);
    if (has_diag("tv")) {
      double tv;
      if (cfg.target == "geometric") {
        tv = empirical_tv(trace, geometric_target(), cfg.burnin,
                          {TvOptions::Method::exact_pmf, 0, 0, 0});
      } else if (cfg.target == "std_normal") {
        tv = empirical_tv(trace, std_normal_target(), cfg.burnin,
                          {TvOptions::Method::binned, cfg.tv_bins, cfg.tv_lo,
                           cfg.tv_hi});
      } else {
        throw InvalidSpec("tv diagnostic needs a known target");
      }
      rec["tv"] = tv;
      tv_table << job.kernel << "," << job.N << "," << job.replicate << ","
               << cfg.seed << "," << fmt(tv) << "\n";
      any_tv = true;
    }
    if (has_diag("acf")) {
      auto series = trace.scalar_series(cfg.target == "pmmh" ? 1 : 0);
      std::vector<double> post(series.begin() + cfg.burnin, series.end());
      auto ac = acf(post, cfg.acf_max_lag);
      fs::path acf_path = out_dir / (tag.str() + "_acf.csv");
      std::ofstream out(acf_path);
      out << "lag,acf\n";
      for (std::size_t k = 0; k < ac.size(); ++k)
        out << k << "," << fmt(ac[k]) << "\n";
      outputs.files.push_back(acf_path);
      rec["acf_file"] = acf_path.filename().string();
      rec["acf_lag50"] = ac.size() > 50 ? ac[50] : 0.0;
    }
    if (has_diag("histogram") && cfg.target == "std_normal") {
      fs::path hist_path = out_dir / (tag.str() + "_hist.csv");
      std::ofstream out(hist_path);
      out << "bin_lo,bin_hi,count,fraction\n";
      double width = (cfg.tv_hi - cfg.tv_lo) / cfg.tv_bins;
      std::vector<long> counts(static_cast<std::size_t>(cfg.tv_bins), 0);
      auto series = trace.scalar_series();
      long total = 0;
      for (std::size_t i = static_cast<std::size_t>(cfg.burnin);
           i < series.size(); ++i) {
        double v = series[i];
        ++total;
        if (v < cfg.tv_lo || v >= cfg.tv_hi) continue;
        auto bin = static_cast<std::size_t>((v - cfg.tv_lo) / width);
        if (bin < counts.size()) ++counts[bin];
      }
      for (int bgn = 0; bgn < cfg.tv_bins; ++bgn) {
        double lo = cfg.tv_lo + bgn * width;
        out << fmt(lo) << "," << fmt(lo + width) << ","
            << counts[static_cast<std::size_t>(bgn)] << ","
            << fmt(static_cast<double>(counts[static_cast<std::size_t>(bgn)]) /
                   std::max<long>(1, total))
            << "\n";
      }
      outputs.files.push_back(hist_path);
      rec["hist_file"] = hist_path.filename().string();
    }
    if (has_diag("classifier") && cfg.target == "geometric" &&
        job.kernel == "noisy") {
      WeightModel wm = WeightModel::from_json(cfg.weights);
      if (wm.enumerable()) {
        auto cls =
            classify(noisy_birth_death(geometric_target(), cfg.theta, wm, job.N));
        rec["classifier"] = {{"verdict", cls.verdict_name()},
                             {"S_rec", cls.recurrence_series.partial_sum},
                             {"S_pos", cls.positivity_series.partial_sum},
                             {"lim_p", cls.lim_p},
                             {"lim_q", cls.lim_q}};
      }
    }
    diag_records.push_back(rec);
  }

  if (any_tv) {
    fs::path tv_path = out_dir / (cfg.id + "_tv.csv");
    std::ofstream(tv_path) << tv_table.str();
    outputs.files.push_back(tv_path);
  }

  if (cfg.emit_gnuplot) {
    fs::path gp_path = out_dir / (cfg.id + "_plots.gp");
    std::ofstream gp(gp_path);
    gp << "# gnuplot script for experiment '" << cfg.id << "'\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n\n"
       << "set title '" << cfg.id << ": traces'\n"
       << "plot \\\n";
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      std::ostringstream tag;
      tag << cfg.id << "_" << jobs[j].kernel << "_N" << jobs[j].N << "_rep"
          << jobs[j].replicate;
      gp << "  '" << tag.str() << "_trace.csv' using 1:2 with lines title '"
         << jobs[j].kernel << " N=" << jobs[j].N << "'"
         << (j + 1 < jobs.size() ? ", \\\n" : "\n");
    }
    if (has_diag("histogram") && cfg.target == "std_normal") {
      gp << "\npause -1\nset title '" << cfg.id << ": histograms'\n"
         << "plot \\\n";
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        std::ostringstream tag;
        tag << cfg.id << "_" << jobs[j].kernel << "_N" << jobs[j].N << "_rep"
            << jobs[j].replicate;
        gp << "  '" << tag.str()
           << "_hist.csv' using (($1+$2)/2):4 with histeps title 'N="
           << jobs[j].N << "'" << (j + 1 < jobs.size() ? ", \\\n" : "\n");
      }
    }
    gp << "\npause -1\n";
    outputs.files.push_back(gp_path);
  }

  fs::path diag_path = out_dir / (cfg.id + "_diagnostics.json");
  std::ofstream(diag_path) << diag_records.dump(2) << "\n";
  outputs.files.push_back(diag_path);
  outputs.diagnostics = diag_records;

  json manifest{{"tool", "nmh"},
                {"version", version_string()},
                {"config", cfg.to_json()}};
  fs::path manifest_path = out_dir / (cfg.id + "_manifest.json");
  std::ofstream(manifest_path) << manifest.dump(2) << "\n";
  outputs.files.push_back(manifest_path);
  outputs.manifest = manifest;
  return outputs;
}

}  // namespace nmh
