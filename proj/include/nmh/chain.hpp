// Generic chain runner.  A single chain is strictly sequential; replicate
// chains are independent given split streams, so the runner is safe to call
// from many workers concurrently (no shared mutable state).

#pragma once

#include "nmh/kernels.hpp"
#include "nmh/trace.hpp"

namespace nmh {

// Runs `iterations` steps from x0.  Deterministic given (spec, x0,
// iterations, rng).  Burn-in is a caller decision: nothing is discarded.
// For the pseudo-marginal kernel the initial weight is drawn from Q_{x0,N}
// and carried weights are recorded alongside the states.
ChainTrace run_chain(const KernelSpec& spec, const State& x0, long iterations,
                     RngStream rng);

}  // namespace nmh
