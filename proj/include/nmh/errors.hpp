#pragma once

#include <stdexcept>
#include <string>

namespace nmh {

// Requested an exact computation on a model without finite support / an
// exact formula, or a discrete-only computation on a continuous kernel.
struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

// A birth-death table (or other spec) violates its structural invariants.
struct InvalidSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The rate-bound preconditions fail, so no bound can be certified.
struct InconclusiveBound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nmh
