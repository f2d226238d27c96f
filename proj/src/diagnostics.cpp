#include "nmh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "nmh/errors.hpp"

namespace nmh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 16-point Gauss-Legendre nodes/weights on [-1,1].
constexpr int kGl = 16;
constexpr double kGlX[kGl] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326,
    0.9894009349916499};
constexpr double kGlW[kGl] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

double quad_panel(const std::function<double(double)>& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGl; ++i) acc += kGlW[i] * f(mid + half * kGlX[i]);
  return acc * half;
}

double quad(const std::function<double(double)>& f, double a, double b,
            int panels) {
  double acc = 0.0, h = (b - a) / panels;
  for (int i = 0; i < panels; ++i)
    acc += quad_panel(f, a + i * h, a + (i + 1) * h);
  return acc;
}

}  // namespace

std::vector<double> acf(std::span<const double> series, int max_lag,
                        bool* degenerate) {
  if (static_cast<long>(series.size()) <= max_lag)
    throw std::domain_error("acf: series shorter than max_lag");
  const long n = static_cast<long>(series.size());
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= n;
  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 1.0);
  if (var == 0.0) {
    if (degenerate) *degenerate = true;
    return out;
  }
  if (degenerate) *degenerate = false;
  for (int k = 1; k <= max_lag; ++k) {
    double acc = 0.0;
    for (long t = 0; t + k < n; ++t)
      acc += (series[static_cast<std::size_t>(t)] - mean) *
             (series[static_cast<std::size_t>(t + k)] - mean);
    out[static_cast<std::size_t>(k)] = acc / n / var;
  }
  return out;
}

double empirical_tv(std::span<const std::int64_t> values,
                    const TargetSpec& target) {
  if (values.empty()) throw std::domain_error("empirical_tv: empty sample");
  std::map<std::int64_t, long> counts;
  for (auto v : values) ++counts[v];
  const double n = static_cast<double>(values.size());

  // Normalize the target pmf by summation until the tail is negligible.
  std::int64_t cap = 1;
  double Z = 0.0;
  {
    double prev;
    std::int64_t m = 1;
    do {
      prev = Z;
      Z += std::exp(target.log_density(State::integer(m)));
      ++m;
    } while ((Z - prev > 1e-16 * Z || m < 64) && m < 100000);
    cap = m - 1;
  }
  std::int64_t max_state = cap;
  if (!counts.empty()) max_state = std::max(max_state, counts.rbegin()->first);

  double tv = 0.0;
  for (std::int64_t m = 1; m <= max_state; ++m) {
    double pi = std::exp(target.log_density(State::integer(m))) / Z;
    auto it = counts.find(m);
    double ph = it == counts.end() ? 0.0 : it->second / n;
    tv += std::abs(ph - pi);
  }
  // Sample mass off the positive support (shouldn't happen for valid runs).
  for (const auto& [m, c] : counts)
    if (m < 1) tv += c / n;
  return 0.5 * tv;
}

double empirical_tv(std::span<const double> values, const TargetSpec& target,
                    TvOptions options) {
  if (values.empty()) throw std::domain_error("empirical_tv: empty sample");
  const int k = options.bins;
  const double lo = options.lo, hi = options.hi;
  if (!(hi > lo) || k < 1) throw std::domain_error("empirical_tv: bad binning");
  const double width = (hi - lo) / k;

  auto dens = [&](double x) {
    return std::exp(target.log_density(State::scalar(x)));
  };
  // Normalizer over a widened range; adequate for the light-tailed
  // one-dimensional targets this artifact uses.
  const double pad = 2.0 * (hi - lo);
  const double Z = quad(dens, lo - pad, hi + pad, 8 * k);

  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  long outside = 0;
  for (double v : values) {
    if (v < lo || v >= hi) {
      ++outside;
      continue;
    }
    auto bin = static_cast<std::size_t>((v - lo) / width);
    if (bin >= static_cast<std::size_t>(k)) bin = static_cast<std::size_t>(k) - 1;
    ++counts[bin];
  }
  const double n = static_cast<double>(values.size());
  double tv = 0.0, pi_in = 0.0;
  for (int i = 0; i < k; ++i) {
    double a = lo + i * width;
    double pi = quad(dens, a, a + width, 2) / Z;
    pi_in += pi;
    tv += std::abs(counts[static_cast<std::size_t>(i)] / n - pi);
  }
  tv += std::abs(outside / n - (1.0 - pi_in));
  return 0.5 * tv;
}

double empirical_tv(const ChainTrace& trace, const TargetSpec& target,
                    long burnin, TvOptions options) {
  if (static_cast<long>(trace.states.size()) <= burnin)
    throw std::domain_error("empirical_tv: no post-burnin states");
  if (options.method == TvOptions::Method::exact_pmf) {
    std::vector<std::int64_t> vals;
    vals.reserve(trace.states.size() - static_cast<std::size_t>(burnin));
    for (std::size_t i = static_cast<std::size_t>(burnin);
         i < trace.states.size(); ++i)
      vals.push_back(trace.states[i].as_integer());
    return empirical_tv(std::span<const std::int64_t>(vals), target);
  }
  std::vector<double> vals;
  vals.reserve(trace.states.size() - static_cast<std::size_t>(burnin));
  for (std::size_t i = static_cast<std::size_t>(burnin); i < trace.states.size();
       ++i)
    vals.push_back(trace.states[i].is_integer()
                       ? static_cast<double>(trace.states[i].as_integer())
                       : trace.states[i].as_scalar());
  return empirical_tv(std::span<const double>(vals), target, options);
}

double drift_ratio(const KernelSpec& spec,
                   const std::function<double(const State&)>& V, const State& x,
                   Mode mode) {
  double vx = V(x);
  if (!(vx >= 1.0)) throw std::domain_error("drift_ratio: V must be >= 1");
  bool exact = spec.proposal.kind == ProposalSpec::Kind::integer_walk &&
               (mode.kind != Mode::Kind::mc) && spec.weights.enumerable();
  if (mode.kind == Mode::Kind::exact && !exact)
    throw UnsupportedOperation("drift_ratio: exact mode needs an enumerable integer-walk kernel");
  if (exact) {
    std::int64_t m = x.as_integer();
    double th = spec.proposal.theta;
    double au = tilde_alpha(spec, x, State::integer(m + 1), Mode::exact()).value;
    double ad = tilde_alpha(spec, x, State::integer(m - 1), Mode::exact()).value;
    double rho = 1.0 - th * au - (1.0 - th) * ad;
    double up = spec.target.in_support(State::integer(m + 1))
                    ? V(State::integer(m + 1))
                    : 0.0;  // unreachable: alpha is 0 there
    double down = spec.target.in_support(State::integer(m - 1))
                      ? V(State::integer(m - 1))
                      : 0.0;
    return (th * au * up + (1.0 - th) * ad * down + rho * vx) / vx;
  }
  RngStream rng(0xd41f7, detail::mix64(static_cast<std::uint64_t>(mode.draws)));
  double acc = 0.0;
  for (long i = 0; i < mode.draws; ++i) {
    auto step = noisy_step(spec, x, rng);
    acc += V(step.next);
  }
  return acc / mode.draws / vx;
}

RateBound tv_rate_bound(const TvRateParams& params, int N) {
  const double R = params.R, tau = params.tau;
  if (!(R > 0) || !(tau > 0) || !(tau < 1))
    throw std::domain_error("tv_rate_bound: need R > 0 and tau in (0,1)");
  const double r = params.r(N);
  const double log_inv_tau = std::log(1.0 / tau);
  if (!(std::log(2.0 * R * r * log_inv_tau) >= 1.0))
    throw InconclusiveBound("tv_rate_bound: r(N) too small for the bound");
  auto f = [&](double n) { return 2.0 * R * std::pow(tau, n) + n / r; };
  double s_star = std::log(2.0 * R * r * log_inv_tau) / log_inv_tau;
  long n1 = std::max<long>(1, static_cast<long>(std::floor(s_star)));
  long n2 = n1 + 1;
  RateBound out;
  if (f(static_cast<double>(n1)) <= f(static_cast<double>(n2))) {
    out.bound = f(static_cast<double>(n1));
    out.argmin_n = static_cast<int>(n1);
  } else {
    out.bound = f(static_cast<double>(n2));
    out.argmin_n = static_cast<int>(n2);
  }
  return out;
}

double mean_acceptance(const ChainTrace& trace) {
  if (trace.accepted.empty())
    throw std::domain_error("mean_acceptance: empty accepted list");
  double acc = 0.0;
  for (bool a : trace.accepted) acc += a ? 1.0 : 0.0;
  return acc / static_cast<double>(trace.accepted.size());
}

double one_step_tv_discrete(const KernelSpec& noisy_spec, const State& x) {
  if (noisy_spec.proposal.kind != ProposalSpec::Kind::integer_walk)
    throw UnsupportedOperation("one_step_tv_discrete: integer-walk kernels only");
  std::int64_t m = x.as_integer();
  double th = noisy_spec.proposal.theta;
  double au = tilde_alpha(noisy_spec, x, State::integer(m + 1), Mode::exact()).value;
  double ad = tilde_alpha(noisy_spec, x, State::integer(m - 1), Mode::exact()).value;
  double bu = marginal_alpha(noisy_spec.target, noisy_spec.proposal, x,
                             State::integer(m + 1));
  double bd = marginal_alpha(noisy_spec.target, noisy_spec.proposal, x,
                             State::integer(m - 1));
  double rho_n = 1.0 - th * au - (1.0 - th) * ad;
  double rho_m = 1.0 - th * bu - (1.0 - th) * bd;
  return 0.5 * (th * std::abs(au - bu) + (1.0 - th) * std::abs(ad - bd) +
                std::abs(rho_n - rho_m));
}

}  // namespace nmh
