#include "nmh/proposal.hpp"

#include <cmath>

#include "nmh/errors.hpp"

namespace nmh {

State ProposalSpec::sample(const State& x, RngStream& rng) const {
  if (kind == Kind::integer_walk) {
    std::int64_t m = x.as_integer();
    return State::integer(rng.uniform01() < theta ? m + 1 : m - 1);
  }
  const auto& v = x.as_vector();
  if (v.size() != step_var.size())
    throw std::domain_error("gaussian_walk: dimension mismatch");
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    y[i] = v[i] + rng.normal(0.0, std::sqrt(step_var[i]));
  return State::vector(std::move(y));
}

double ProposalSpec::log_ratio(const State& x, const State& y) const {
  if (kind == Kind::gaussian_walk) return 0.0;  // symmetric
  std::int64_t dx = y.as_integer() - x.as_integer();
  if (dx == 1) return std::log((1.0 - theta) / theta);
  if (dx == -1) return std::log(theta / (1.0 - theta));
  throw std::domain_error("integer_walk: states are not neighbors");
}

ProposalSpec integer_walk(double theta) {
  if (!(theta > 0.0) || !(theta < 1.0))
    throw InvalidSpec("integer_walk: theta must lie in (0,1)");
  ProposalSpec p;
  p.kind = ProposalSpec::Kind::integer_walk;
  p.theta = theta;
  return p;
}

ProposalSpec gaussian_walk(std::vector<double> step_var) {
  for (double v : step_var)
    if (!(v > 0.0)) throw InvalidSpec("gaussian_walk: variances must be > 0");
  ProposalSpec p;
  p.kind = ProposalSpec::Kind::gaussian_walk;
  p.step_var = std::move(step_var);
  return p;
}

ProposalSpec gaussian_walk(double step_var, int dim) {
  return gaussian_walk(std::vector<double>(static_cast<std::size_t>(dim), step_var));
}

}  // namespace nmh
