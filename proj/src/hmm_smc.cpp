#include "nmh/hmm_smc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nmh/errors.hpp"

namespace nmh {

using nlohmann::json;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_normal_pdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}
}  // namespace

LgssmPath simulate_lgssm(const LgssmParams& params, int T, RngStream& rng) {
  if (T < 1) throw std::domain_error("simulate_lgssm: T must be >= 1");
  if (!(params.sigma_x2 >= 0) || !(params.sigma_y2 > 0))
    throw InvalidSpec("simulate_lgssm: variances must be positive");
  LgssmPath path;
  path.latent.reserve(static_cast<std::size_t>(T));
  path.obs.y.reserve(static_cast<std::size_t>(T));
  double x = params.x0;
  const double sx = std::sqrt(params.sigma_x2), sy = std::sqrt(params.sigma_y2);
  for (int t = 0; t < T; ++t) {
    x = params.a * x + rng.normal(0.0, sx);
    path.latent.push_back(x);
    path.obs.y.push_back(x + rng.normal(0.0, sy));
  }
  return path;
}

double kalman_loglik(const LgssmParams& params, const ObservationSeries& obs) {
  if (obs.y.empty()) throw std::domain_error("kalman_loglik: empty series");
  double m = params.a * params.x0;
  double P = params.sigma_x2;
  double ll = 0.0;
  for (double y : obs.y) {
    double S = P + params.sigma_y2;
    ll += log_normal_pdf(y, m, S);
    double K = P / S;
    double mf = m + K * (y - m);
    double Pf = (1.0 - K) * P;
    m = params.a * mf;
    P = params.a * params.a * Pf + params.sigma_x2;
  }
  return ll;
}

double ParticleSystem::loglik() const {
  double acc = 0.0;
  for (double v : log_normalizer_increments) acc += v;
  return acc;
}

ParticleSystem bootstrap_filter(const LgssmParams& params,
                                const ObservationSeries& obs, int particles,
                                RngStream& rng) {
  if (particles < 1)
    throw std::domain_error("bootstrap_filter: need at least one particle");
  const int N = particles;
  ParticleSystem sys;
  sys.particle_count = N;
  sys.particles.assign(static_cast<std::size_t>(N), params.x0);
  sys.log_normalizer_increments.reserve(obs.y.size());

  const double sx = std::sqrt(params.sigma_x2);
  std::vector<double> logw(static_cast<std::size_t>(N));
  std::vector<double> cumw(static_cast<std::size_t>(N));
  std::vector<double> next(static_cast<std::size_t>(N));

  for (double y : obs.y) {
    for (auto& p : sys.particles) p = params.a * p + rng.normal(0.0, sx);
    double maxlw = kNegInf;
    for (int i = 0; i < N; ++i) {
      logw[static_cast<std::size_t>(i)] =
          log_normal_pdf(y, sys.particles[static_cast<std::size_t>(i)],
                         params.sigma_y2);
      maxlw = std::max(maxlw, logw[static_cast<std::size_t>(i)]);
    }
    if (maxlw == kNegInf) {
      sys.underflow = true;
      sys.log_normalizer_increments.push_back(kNegInf);
      return sys;
    }
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
      double w = std::exp(logw[static_cast<std::size_t>(i)] - maxlw);
      total += w;
      cumw[static_cast<std::size_t>(i)] = total;
    }
    sys.log_normalizer_increments.push_back(
        maxlw + std::log(total / N));
    // Multinomial resampling at every step.
    for (int i = 0; i < N; ++i) {
      double u = rng.uniform01() * total;
      auto it = std::upper_bound(cumw.begin(), cumw.end(), u);
      auto idx = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(it - cumw.begin(), N - 1));
      next[static_cast<std::size_t>(i)] = sys.particles[idx];
    }
    sys.particles.swap(next);
  }
  return sys;
}

double bootstrap_pf_loglik(const LgssmParams& params,
                           const ObservationSeries& obs, int particles,
                           RngStream& rng, bool* underflow) {
  ParticleSystem sys = bootstrap_filter(params, obs, particles, rng);
  if (underflow) *underflow = sys.underflow;
  return sys.loglik();
}

// --- PMMH -------------------------------------------------------------------

int PmmhPrior::dim() const {
  return (x0 ? 1 : 0) + (a ? 1 : 0) + (sigma_x2 ? 1 : 0) + (sigma_y2 ? 1 : 0);
}

namespace {

struct ParamCodec {
  PmmhPrior prior;

  LgssmParams decode(const State& z) const {
    const auto& v = z.as_vector();
    LgssmParams p = prior.fixed;
    std::size_t i = 0;
    if (prior.x0) p.x0 = v.at(i++);
    if (prior.a) p.a = v.at(i++);
    if (prior.sigma_x2) p.sigma_x2 = std::exp(v.at(i++));
    if (prior.sigma_y2) p.sigma_y2 = std::exp(v.at(i++));
    return p;
  }

  State encode(const LgssmParams& p) const {
    std::vector<double> v;
    if (prior.x0) v.push_back(p.x0);
    if (prior.a) v.push_back(p.a);
    if (prior.sigma_x2) v.push_back(std::log(p.sigma_x2));
    if (prior.sigma_y2) v.push_back(std::log(p.sigma_y2));
    return State::vector(std::move(v));
  }

  // Box prior on the natural scale plus the log-transform Jacobian for the
  // variance coordinates.
  double log_prior(const State& z) const {
    const auto& v = z.as_vector();
    double lp = 0.0;
    std::size_t i = 0;
    if (prior.x0) {
      double x = v.at(i++);
      if (x < prior.x0->lo || x > prior.x0->hi) return kNegInf;
    }
    if (prior.a) {
      double x = v.at(i++);
      if (x < prior.a->lo || x > prior.a->hi) return kNegInf;
    }
    if (prior.sigma_x2) {
      double lz = v.at(i++);
      double s = std::exp(lz);
      if (s < prior.sigma_x2->lo || s > prior.sigma_x2->hi) return kNegInf;
      lp += lz;
    }
    if (prior.sigma_y2) {
      double lz = v.at(i++);
      double s = std::exp(lz);
      if (s < prior.sigma_y2->lo || s > prior.sigma_y2->hi) return kNegInf;
      lp += lz;
    }
    return lp;
  }
};

}  // namespace

PmmhSetup pmmh_kernels(const PmmhPrior& prior,
                       const std::vector<double>& step_sd,
                       const ObservationSeries& obs, int particles) {
  const int d = prior.dim();
  if (d == 0) throw InvalidSpec("pmmh_kernels: no sampled parameters");
  if (static_cast<int>(step_sd.size()) != d)
    throw InvalidSpec("pmmh_kernels: step_sd size must match sampled subset");
  if (obs.y.empty()) throw InvalidSpec("pmmh_kernels: empty observations");

  ParamCodec codec{prior};

  TargetSpec target;
  target.support = SupportKind::real_vector;
  target.dim = d;
  target.name = "lgssm_posterior";
  target.log_density = [codec, obs](const State& z) {
    double lp = codec.log_prior(z);
    if (lp == kNegInf) return kNegInf;
    return lp + kalman_loglik(codec.decode(z), obs);
  };

  std::vector<double> var(step_sd.size());
  for (std::size_t i = 0; i < step_sd.size(); ++i) var[i] = step_sd[i] * step_sd[i];
  ProposalSpec prop = gaussian_walk(var);

  // W_z = pf-likelihood / exact likelihood: mean one by the unbiasedness of
  // the filter, strictly positive a.s., and the exact likelihood cancels
  // against the target in the acceptance ratio.  Sampled on the log scale:
  // in badly-fitting parameter regions the ratio drops below the smallest
  // normal double, but its log stays finite.
  WeightModel weights = WeightModel::custom_log(
      "smc_likelihood",
      [codec, obs](const State& z, int N, RngStream& rng) {
        LgssmParams p = codec.decode(z);
        bool uf = false;
        double pf = bootstrap_pf_loglik(p, obs, N, rng, &uf);
        if (uf) throw std::runtime_error("smc weight: particle underflow");
        return pf - kalman_loglik(p, obs);
      },
      /*homogeneous=*/false);

  PmmhSetup setup;
  setup.dim = d;
  setup.decode = [codec](const State& z) { return codec.decode(z); };
  setup.encode = [codec](const LgssmParams& p) { return codec.encode(p); };

  KernelSpec base;
  base.target = target;
  base.proposal = prop;
  base.weights = weights;
  base.N = particles;

  setup.marginal = base;
  setup.marginal.kind = KernelSpec::Kind::marginal;
  setup.pseudo_marginal = base;
  setup.pseudo_marginal.kind = KernelSpec::Kind::pseudo_marginal;
  setup.noisy = base;
  setup.noisy.kind = KernelSpec::Kind::noisy;
  return setup;
}

// --- I/O ----------------------------------------------------------------

ObservationSeries read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw InvalidSpec("observation CSV: empty input");
  ObservationSeries obs;
  int expect = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ','))
      throw InvalidSpec("observation CSV: bad row");
    int t = std::stoi(cell);
    if (!std::getline(row, cell, ','))
      throw InvalidSpec("observation CSV: bad row");
    if (t != expect)
      throw InvalidSpec("observation CSV: t must run 1..T contiguously");
    obs.y.push_back(std::stod(cell));
    ++expect;
  }
  if (obs.y.empty()) throw InvalidSpec("observation CSV: no rows");
  return obs;
}

void write_series_csv(std::ostream& out, const ObservationSeries& obs) {
  out << "t,y\n";
  char buf[64];
  for (std::size_t i = 0; i < obs.y.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, obs.y[i]);
    out << buf;
  }
}

json lgssm_params_json(const LgssmParams& p) {
  return json{{"x0", p.x0},
              {"a", p.a},
              {"sigma_x2", p.sigma_x2},
              {"sigma_y2", p.sigma_y2}};
}

LgssmParams lgssm_params_from_json(const json& j) {
  LgssmParams p;
  p.x0 = j.at("x0").get<double>();
  p.a = j.at("a").get<double>();
  p.sigma_x2 = j.at("sigma_x2").get<double>();
  p.sigma_y2 = j.at("sigma_y2").get<double>();
  return p;
}

}  // namespace nmh
