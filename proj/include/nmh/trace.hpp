// Seeded realization of a chain.  states has length iterations+1;
// accepted[i] records whether the move into states[i+1] was accepted.
// carried_weight is populated only by the pseudo-marginal kernel.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nmh/state.hpp"

namespace nmh {

struct ChainTrace {
  std::vector<State> states;
  std::vector<bool> accepted;
  std::vector<double> carried_weight;  // empty unless pseudo-marginal

  std::string kernel_id;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  long iterations = 0;

  // Scalar view of the trajectory (integer value or coordinate `coord`).
  std::vector<double> scalar_series(int coord = 0) const;
};

}  // namespace nmh
