// Linear-Gaussian state-space example: data simulation, exact Kalman
// likelihood (known initial state), bootstrap particle-filter likelihood
// estimates (multinomial resampling every step, unbiased on the likelihood
// scale), and the pseudo-marginal / noisy parameter samplers built on them.

#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nmh/kernels.hpp"
#include "nmh/rng.hpp"

namespace nmh {

// X_t = a X_{t-1} + N(0, sigma_x2), Y_t = X_t + N(0, sigma_y2), X_0 = x0
// known.
struct LgssmParams {
  double x0 = 0.0;
  double a = 0.9;
  double sigma_x2 = 1.0;
  double sigma_y2 = 1.0;
};

struct ObservationSeries {
  std::vector<double> y;
  int length() const { return static_cast<int>(y.size()); }
};

struct LgssmPath {
  std::vector<double> latent;  // X_1..X_T
  ObservationSeries obs;
};

LgssmPath simulate_lgssm(const LgssmParams& params, int T, RngStream& rng);

// Exact log-likelihood via the prediction/update recursion; no initial
// state uncertainty at t = 0.
double kalman_loglik(const LgssmParams& params, const ObservationSeries& obs);

struct ParticleSystem {
  int particle_count = 0;
  std::vector<double> particles;                  // final locations
  std::vector<double> log_normalizer_increments;  // per-step log mean weight
  bool underflow = false;

  double loglik() const;
};

ParticleSystem bootstrap_filter(const LgssmParams& params,
                                const ObservationSeries& obs, int particles,
                                RngStream& rng);

// Sum of the per-step log mean weights; -inf with the underflow flag set
// when every particle weight vanishes numerically.
double bootstrap_pf_loglik(const LgssmParams& params,
                           const ObservationSeries& obs, int particles,
                           RngStream& rng, bool* underflow = nullptr);

// --- PMMH -------------------------------------------------------------------

struct ParamBox {
  double lo = 0.0, hi = 1.0;
};

// Box-uniform prior over a subset of {x0, a, sigma_x2, sigma_y2}; a
// parameter without a box stays fixed at `fixed`'s value.  Sampled
// variances are proposed on the log scale (prior transformed accordingly),
// which keeps them positive.
struct PmmhPrior {
  std::optional<ParamBox> x0, a, sigma_x2, sigma_y2;
  LgssmParams fixed;

  int dim() const;
};

struct PmmhSetup {
  KernelSpec marginal;         // Kalman-exact reference
  KernelSpec pseudo_marginal;  // particle-filter weights, carried
  KernelSpec noisy;            // particle-filter weights, refreshed
  int dim = 0;
  std::function<LgssmParams(const State&)> decode;
  std::function<State(const LgssmParams&)> encode;
};

// step_sd: random-walk standard deviations per sampled coordinate (in the
// transformed space), in the order x0, a, log sigma_x2, log sigma_y2
// restricted to the sampled subset.
PmmhSetup pmmh_kernels(const PmmhPrior& prior,
                       const std::vector<double>& step_sd,
                       const ObservationSeries& obs, int particles);

// CSV with header "t,y"; the generator writes the same format plus a
// sidecar JSON of the true parameters.
ObservationSeries read_series_csv(std::istream& in);
void write_series_csv(std::ostream& out, const ObservationSeries& obs);
nlohmann::json lgssm_params_json(const LgssmParams& params);
LgssmParams lgssm_params_from_json(const nlohmann::json& j);

}  // namespace nmh
