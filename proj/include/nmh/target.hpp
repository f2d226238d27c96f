// Target distributions: log-densities up to an additive constant, with
// -infinity exactly off support.  MH ratios only ever use differences.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "nmh/state.hpp"

namespace nmh {

enum class SupportKind { positive_integers, integers, real_vector };

struct TargetSpec {
  SupportKind support = SupportKind::real_vector;
  int dim = 1;
  std::string name;
  std::function<double(const State&)> log_density;

  bool in_support(const State& x) const {
    return log_density(x) > -std::numeric_limits<double>::infinity();
  }
};

// pi(m) = (1/2)^m on the positive integers (already normalized).
TargetSpec geometric_target();

// pi(m) proportional to exp(-h(m)) on the positive integers.
TargetSpec discrete_target(std::function<double(std::int64_t)> h,
                           std::string name = "discrete");

// Standard normal on the real line.
TargetSpec std_normal_target();

}  // namespace nmh
