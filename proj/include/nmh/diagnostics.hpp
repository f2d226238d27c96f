// Chain diagnostics: autocorrelation, acceptance rates, empirical total
// variation against a target (exact pmf for discrete targets, quadrature
// bin masses for continuous ones), drift-condition ratios, and the
// integer-minimized invariant-distance rate bound.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nmh/kernels.hpp"
#include "nmh/trace.hpp"

namespace nmh {

// Biased-normalization autocorrelation at lags 0..max_lag; acf[0] = 1.
// A constant series sets *degenerate and returns all ones.
std::vector<double> acf(std::span<const double> series, int max_lag,
                        bool* degenerate = nullptr);

struct TvOptions {
  enum class Method { exact_pmf, binned };
  Method method = Method::binned;
  int bins = 50;
  double lo = -4.0;
  double hi = 4.0;
};

// (1/2) sum |empirical - target| over atoms (exact_pmf) or bins plus an
// out-of-range cell (binned).  Target masses come from the log-density:
// discrete targets are normalized by summation, continuous ones by
// Gauss-Legendre quadrature per bin with the normalizer integrated over a
// widened range.  Throws on an empty post-burnin trace.
double empirical_tv(const ChainTrace& trace, const TargetSpec& target,
                    long burnin, TvOptions options);
double empirical_tv(std::span<const std::int64_t> values,
                    const TargetSpec& target);
double empirical_tv(std::span<const double> values, const TargetSpec& target,
                    TvOptions options);

// (P_noisy V)(x) / V(x): exact three-term sum for integer-walk kernels,
// MC average of V(next)/V(x) otherwise.
double drift_ratio(const KernelSpec& spec,
                   const std::function<double(const State&)>& V,
                   const State& x, Mode mode = Mode::automatic());

struct TvRateParams {
  double R = 1.0;
  double tau = 0.5;                      // geometric rate, in (0,1)
  std::function<double(int)> r;          // perturbation scale r(N)
};

struct RateBound {
  double bound = 0.0;
  int argmin_n = 0;
};

// min over integers n >= 1 of 2 R tau^n + n / r(N); requires
// log(2 R r(N) log(1/tau)) >= 1, else throws InconclusiveBound.  The
// minimizer is located from the real-valued stationary point and checked
// against its integer neighbors.
RateBound tv_rate_bound(const TvRateParams& params, int N);

double mean_acceptance(const ChainTrace& trace);

// One-step total variation between the noisy and marginal kernels at x for
// integer-walk kernels, from exact acceptance sums:
//   (1/2) (theta |da_up| + (1-theta) |da_down| + |drho|).
double one_step_tv_discrete(const KernelSpec& noisy_spec, const State& x);

}  // namespace nmh
