// The three transition kernels.  The marginal chain accepts with
// alpha(x,y); the pseudo-marginal carries its weight and accepts (y,u)
// against the carried (x,w); the noisy chain refreshes both weights
// independently at every iteration and accepts with the same randomized
// probability.  All acceptance arithmetic is done in log space.

#pragma once

#include "nmh/proposal.hpp"
#include "nmh/rng.hpp"
#include "nmh/state.hpp"
#include "nmh/target.hpp"
#include "nmh/weights.hpp"

namespace nmh {

struct KernelSpec {
  enum class Kind { marginal, pseudo_marginal, noisy };

  Kind kind = Kind::marginal;
  TargetSpec target;
  ProposalSpec proposal;
  WeightModel weights;  // ignored by the marginal kernel
  int N = 1;

  static const char* kind_name(Kind k);
};

// log min{1, pi(y) q(y,x) / (pi(x) q(x,y))}; -inf when y is off support.
// Throws if x itself is off support (the chain would be corrupt).
double marginal_log_alpha(const TargetSpec& target, const ProposalSpec& proposal,
                          const State& x, const State& y);

// min{1, pi(y) u q(y,x) / (pi(x) w q(x,y))} for realized weights w, u > 0.
double bar_alpha(const TargetSpec& target, const ProposalSpec& proposal,
                 const State& x, double w, const State& y, double u);

// Same acceptance probability from log-weights (no underflow for extreme
// weight ratios).
double bar_alpha_log(const TargetSpec& target, const ProposalSpec& proposal,
                     const State& x, double log_w, const State& y,
                     double log_u);

struct StepDiagnostics {
  double w = 1.0;          // weight drawn at the current state
  double u = 1.0;          // weight drawn at the proposal
  double alpha_bar = 0.0;  // realized acceptance probability
};

struct NoisyStepResult {
  State next;
  bool accepted;
  StepDiagnostics diag;
};

// One draw from the noisy kernel: propose, refresh both weights
// independently, accept with bar_alpha.  Off-support proposals reject
// without drawing weights or an acceptance uniform.
NoisyStepResult noisy_step(const KernelSpec& spec, const State& x,
                           RngStream& rng);

struct PseudoMarginalStepResult {
  State next;
  double weight;  // carried weight after the step
  bool accepted;
};

// One draw from the pseudo-marginal kernel: only the proposal's weight is
// refreshed; on rejection the pair (x, w) is retained.
PseudoMarginalStepResult pseudo_marginal_step(const KernelSpec& spec,
                                              const State& x, double w,
                                              RngStream& rng);

struct PseudoMarginalLogStepResult {
  State next;
  double log_weight;
  bool accepted;
};

// Log-weight form used by the chain runner.
PseudoMarginalLogStepResult pseudo_marginal_step_log(const KernelSpec& spec,
                                                     const State& x,
                                                     double log_w,
                                                     RngStream& rng);

// One draw from the marginal kernel (unit weights).
NoisyStepResult marginal_step(const KernelSpec& spec, const State& x,
                              RngStream& rng);

// Averaged noisy acceptance probability E[bar_alpha(x,W;y,U)]: a double
// sum over atom pairs when the weights enumerate, an MC mean otherwise.
MomentEstimate tilde_alpha(const KernelSpec& spec, const State& x,
                           const State& y, Mode mode = Mode::automatic());

// Noisy rejection probability 1 - sum_y q(x,y) tilde_alpha(x,y); exact for
// the two-neighbor integer walk.
MomentEstimate tilde_rho(const KernelSpec& spec, const State& x,
                         Mode mode = Mode::automatic());

// Marginal counterparts (unit weights).
double marginal_alpha(const TargetSpec& target, const ProposalSpec& proposal,
                      const State& x, const State& y);
double marginal_rho(const TargetSpec& target, const ProposalSpec& proposal,
                    const State& x);

}  // namespace nmh
