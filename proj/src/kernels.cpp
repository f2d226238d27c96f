#include "nmh/kernels.hpp"

#include <cmath>
#include <limits>

#include "nmh/errors.hpp"

namespace nmh {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

const char* KernelSpec::kind_name(Kind k) {
  switch (k) {
    case Kind::marginal: return "marginal";
    case Kind::pseudo_marginal: return "pseudo_marginal";
    case Kind::noisy: return "noisy";
  }
  return "?";
}

double marginal_log_alpha(const TargetSpec& target, const ProposalSpec& proposal,
                          const State& x, const State& y) {
  double lx = target.log_density(x);
  if (lx == kNegInf)
    throw std::domain_error("marginal_log_alpha: current state off support");
  double ly = target.log_density(y);
  if (ly == kNegInf) return kNegInf;
  return std::min(0.0, ly - lx + proposal.log_ratio(x, y));
}

double bar_alpha_log(const TargetSpec& target, const ProposalSpec& proposal,
                     const State& x, double log_w, const State& y,
                     double log_u) {
  double lx = target.log_density(x);
  if (lx == kNegInf)
    throw std::domain_error("bar_alpha: current state off support");
  double ly = target.log_density(y);
  if (ly == kNegInf) return 0.0;
  double log_ratio = ly - lx + proposal.log_ratio(x, y) + log_u - log_w;
  return std::exp(std::min(0.0, log_ratio));
}

double bar_alpha(const TargetSpec& target, const ProposalSpec& proposal,
                 const State& x, double w, const State& y, double u) {
  if (!(w > 0.0) || !(u > 0.0))
    throw std::domain_error("bar_alpha: weights must be strictly positive");
  return bar_alpha_log(target, proposal, x, std::log(w), y, std::log(u));
}

double marginal_alpha(const TargetSpec& target, const ProposalSpec& proposal,
                      const State& x, const State& y) {
  double la = marginal_log_alpha(target, proposal, x, y);
  return la == kNegInf ? 0.0 : std::exp(la);
}

NoisyStepResult noisy_step(const KernelSpec& spec, const State& x,
                           RngStream& rng) {
  State y = spec.proposal.sample(x, rng);
  if (!spec.target.in_support(y))
    return {x, false, {std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN(), 0.0}};
  double lw = spec.weights.sample_log(x, spec.N, rng);
  double lu = spec.weights.sample_log(y, spec.N, rng);
  double a = bar_alpha_log(spec.target, spec.proposal, x, lw, y, lu);
  bool accept = rng.uniform01() < a;
  return {accept ? y : x, accept, {std::exp(lw), std::exp(lu), a}};
}

PseudoMarginalLogStepResult pseudo_marginal_step_log(const KernelSpec& spec,
                                                     const State& x,
                                                     double log_w,
                                                     RngStream& rng) {
  State y = spec.proposal.sample(x, rng);
  if (!spec.target.in_support(y)) return {x, log_w, false};
  double lu = spec.weights.sample_log(y, spec.N, rng);
  double a = bar_alpha_log(spec.target, spec.proposal, x, log_w, y, lu);
  bool accept = rng.uniform01() < a;
  if (accept) return {y, lu, true};
  return {x, log_w, false};
}

PseudoMarginalStepResult pseudo_marginal_step(const KernelSpec& spec,
                                              const State& x, double w,
                                              RngStream& rng) {
  if (!(w > 0.0))
    throw std::domain_error("pseudo_marginal_step: carried weight must be > 0");
  auto r = pseudo_marginal_step_log(spec, x, std::log(w), rng);
  return {r.next, std::exp(r.log_weight), r.accepted};
}

NoisyStepResult marginal_step(const KernelSpec& spec, const State& x,
                              RngStream& rng) {
  KernelSpec unit = spec;
  unit.weights = WeightModel::unit();
  return noisy_step(unit, x, rng);
}

MomentEstimate tilde_alpha(const KernelSpec& spec, const State& x,
                           const State& y, Mode mode) {
  if (!spec.target.in_support(y)) return {0.0, 0.0, true};
  bool exact = false;
  switch (mode.kind) {
    case Mode::Kind::exact:
      if (!spec.weights.enumerable())
        throw UnsupportedOperation("tilde_alpha: weights not enumerable");
      exact = true;
      break;
    case Mode::Kind::mc:
      exact = false;
      break;
    case Mode::Kind::automatic:
      exact = spec.weights.enumerable();
      break;
  }
  double lx = spec.target.log_density(x);
  if (lx == kNegInf)
    throw std::domain_error("tilde_alpha: current state off support");
  double base = spec.target.log_density(y) - lx + spec.proposal.log_ratio(x, y);
  if (exact) {
    double acc = 0.0;
    for (const auto& aw : spec.weights.enumerate(x, spec.N))
      for (const auto& au : spec.weights.enumerate(y, spec.N))
        acc += aw.prob * au.prob *
               std::exp(std::min(0.0, base + std::log(au.value) -
                                          std::log(aw.value)));
    return {acc, 0.0, true};
  }
  double acc = 0.0, acc2 = 0.0;
  RngStream rng(0xa11ce, detail::mix64(static_cast<std::uint64_t>(spec.N)));
  for (long i = 0; i < mode.draws; ++i) {
    double lw = spec.weights.sample_log(x, spec.N, rng);
    double lu = spec.weights.sample_log(y, spec.N, rng);
    double a = std::exp(std::min(0.0, base + lu - lw));
    acc += a;
    acc2 += a * a;
  }
  double mean = acc / mode.draws;
  double var = std::max(0.0, acc2 / mode.draws - mean * mean);
  return {mean, std::sqrt(var / mode.draws), false};
}

MomentEstimate tilde_rho(const KernelSpec& spec, const State& x, Mode mode) {
  if (spec.proposal.kind == ProposalSpec::Kind::integer_walk) {
    std::int64_t m = x.as_integer();
    double th = spec.proposal.theta;
    MomentEstimate up = tilde_alpha(spec, x, State::integer(m + 1), mode);
    MomentEstimate down = tilde_alpha(spec, x, State::integer(m - 1), mode);
    double se = std::sqrt(th * th * up.std_error * up.std_error +
                          (1 - th) * (1 - th) * down.std_error * down.std_error);
    return {1.0 - th * up.value - (1 - th) * down.value, se,
            up.exact && down.exact};
  }
  if (mode.kind == Mode::Kind::exact)
    throw UnsupportedOperation("tilde_rho: exact mode needs a discrete proposal");
  // MC over proposals with one weight pair per proposal (unbiased).
  RngStream rng(0xbe7a, detail::mix64(static_cast<std::uint64_t>(spec.N) + 1));
  double acc = 0.0, acc2 = 0.0;
  for (long i = 0; i < mode.draws; ++i) {
    State y = spec.proposal.sample(x, rng);
    double a = 0.0;
    if (spec.target.in_support(y)) {
      double lw = spec.weights.sample_log(x, spec.N, rng);
      double lu = spec.weights.sample_log(y, spec.N, rng);
      a = bar_alpha_log(spec.target, spec.proposal, x, lw, y, lu);
    }
    acc += a;
    acc2 += a * a;
  }
  double mean = acc / mode.draws;
  double var = std::max(0.0, acc2 / mode.draws - mean * mean);
  return {1.0 - mean, std::sqrt(var / mode.draws), false};
}

double marginal_rho(const TargetSpec& target, const ProposalSpec& proposal,
                    const State& x) {
  if (proposal.kind != ProposalSpec::Kind::integer_walk)
    throw UnsupportedOperation("marginal_rho: exact form needs a discrete proposal");
  std::int64_t m = x.as_integer();
  double th = proposal.theta;
  return 1.0 - th * marginal_alpha(target, proposal, x, State::integer(m + 1)) -
         (1 - th) * marginal_alpha(target, proposal, x, State::integer(m - 1));
}

}  // namespace nmh
