#include "nmh/chain.hpp"

#include <cmath>
#include <stdexcept>

namespace nmh {

ChainTrace run_chain(const KernelSpec& spec, const State& x0, long iterations,
                     RngStream rng) {
  if (iterations < 0) throw std::domain_error("run_chain: negative iterations");
  if (!spec.target.in_support(x0))
    throw std::domain_error("run_chain: x0 off the target support");

  ChainTrace trace;
  trace.kernel_id = KernelSpec::kind_name(spec.kind);
  trace.seed = rng.seed();
  trace.stream_id = rng.stream_id();
  trace.iterations = iterations;
  trace.states.reserve(static_cast<std::size_t>(iterations) + 1);
  trace.accepted.reserve(static_cast<std::size_t>(iterations));
  trace.states.push_back(x0);

  switch (spec.kind) {
    case KernelSpec::Kind::marginal: {
      KernelSpec unit = spec;
      unit.weights = WeightModel::unit();
      State x = x0;
      for (long i = 0; i < iterations; ++i) {
        auto r = noisy_step(unit, x, rng);
        x = r.next;
        trace.states.push_back(x);
        trace.accepted.push_back(r.accepted);
      }
      break;
    }
    case KernelSpec::Kind::noisy: {
      State x = x0;
      for (long i = 0; i < iterations; ++i) {
        auto r = noisy_step(spec, x, rng);
        x = r.next;
        trace.states.push_back(x);
        trace.accepted.push_back(r.accepted);
      }
      break;
    }
    case KernelSpec::Kind::pseudo_marginal: {
      // The chain carries the weight in log space; the recorded trace holds
      // exp of it (values below ~1e-308 round to zero in the record only).
      trace.carried_weight.reserve(static_cast<std::size_t>(iterations) + 1);
      State x = x0;
      double log_w = spec.weights.sample_log(x0, spec.N, rng);
      trace.carried_weight.push_back(std::exp(log_w));
      for (long i = 0; i < iterations; ++i) {
        auto r = pseudo_marginal_step_log(spec, x, log_w, rng);
        x = r.next;
        log_w = r.log_weight;
        trace.states.push_back(x);
        trace.carried_weight.push_back(std::exp(log_w));
        trace.accepted.push_back(r.accepted);
      }
      break;
    }
  }
  return trace;
}

std::vector<double> ChainTrace::scalar_series(int coord) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    if (s.is_integer())
      out.push_back(static_cast<double>(s.as_integer()));
    else
      out.push_back(s.as_vector().at(static_cast<std::size_t>(coord)));
  }
  return out;
}

}  // namespace nmh
