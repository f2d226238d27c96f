// Proposal kernels.  integer_walk(theta) proposes m+1 with probability
// theta and m-1 otherwise; gaussian_walk is a symmetric random walk with a
// per-coordinate step variance.

#pragma once

#include <stdexcept>
#include <vector>

#include "nmh/rng.hpp"
#include "nmh/state.hpp"

namespace nmh {

struct ProposalSpec {
  enum class Kind { integer_walk, gaussian_walk };

  Kind kind = Kind::integer_walk;
  double theta = 0.5;              // integer walk: up-move probability
  std::vector<double> step_var;    // gaussian walk: variance per coordinate

  State sample(const State& x, RngStream& rng) const;

  // log q(y,x) - log q(x,y); zero for the symmetric gaussian walk.
  double log_ratio(const State& x, const State& y) const;
};

ProposalSpec integer_walk(double theta);
ProposalSpec gaussian_walk(std::vector<double> step_var);
ProposalSpec gaussian_walk(double step_var, int dim = 1);

}  // namespace nmh
