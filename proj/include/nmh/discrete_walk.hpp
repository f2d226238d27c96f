// Exact analysis of nearest-neighbor chains on the positive integers:
// birth-death specs built from exact noisy/marginal acceptance sums, and a
// three-valued recurrence/transience/geometric-ergodicity classifier based
// on the standard series criteria
//
//   recurrent            <=>  sum_m prod_{i=2..m} q_i/p_i diverges,
//   positive recurrent   <=>  sum_m prod_{i=2..m} p_{i-1}/q_i converges,
//   geometrically ergodic <=  lim p_m < lim q_m,
//
// with q_1 = 0 by convention.  Verdicts are numeric: convergence means the
// tail increments fall below a tolerance, divergence means the partial sums
// blow past a threshold or the terms stop vanishing, anything else is
// reported as inconclusive rather than guessed.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nmh/kernels.hpp"
#include "nmh/weights.hpp"

namespace nmh {

struct BirthDeathSpec {
  std::function<double(std::int64_t)> up;    // p(m) = P(m, {m+1})
  std::function<double(std::int64_t)> down;  // q(m) = P(m, {m-1}), q(1) = 0
  std::string source;
};

struct SeriesEvidence {
  double partial_sum = 0.0;
  double max_tail_increment = 0.0;  // max term over the last M/2 indices
  double min_tail_increment = 0.0;
  bool converged = false;
  bool diverged = false;
  long terms = 0;
};

struct ClassifyOptions {
  long truncation = 30000;
  double tol = 1e-12;                  // Cauchy-increment tolerance
  double divergence_threshold = 1e12;  // partial-sum blow-up level
  double term_floor = 1e-8;            // "terms do not vanish" level
  double limit_tol = 1e-3;             // margin in lim p < lim q
};

struct WalkClassification {
  enum class Verdict {
    transient,
    recurrent_null,
    positive_recurrent,
    geometrically_ergodic,
    inconclusive,
  };

  Verdict verdict = Verdict::inconclusive;
  SeriesEvidence recurrence_series;   // terms prod q_i/p_i
  SeriesEvidence positivity_series;   // terms prod p_{i-1}/q_i
  double lim_p = 0.0, lim_q = 0.0;    // Richardson tail estimates
  double lim_uncertainty = 0.0;
  long truncation = 0;
  double tol = 0.0;

  const char* verdict_name() const;
  std::string summary() const;
};

// Exact noisy birth-death probabilities p(m) = theta * tilde_alpha(m,m+1),
// q(m) = (1-theta) * tilde_alpha(m,m-1) by weight-atom enumeration.
// Requires an enumerable weight model and an integer-walk proposal.
BirthDeathSpec noisy_birth_death(const TargetSpec& target, double theta,
                                 const WeightModel& weights, int N);

// Marginal (exact-alpha) birth-death probabilities.
BirthDeathSpec marginal_birth_death(const TargetSpec& target, double theta);

BirthDeathSpec constant_birth_death(double p, double q);

// CSV with header "m,p,q"; rows must cover m = 1..max contiguously.
BirthDeathSpec birth_death_from_csv(std::istream& in);

WalkClassification classify(const BirthDeathSpec& spec, long truncation = 30000,
                            double tol = 1e-12);
WalkClassification classify(const BirthDeathSpec& spec,
                            const ClassifyOptions& options);

// --- proposition-style reports ---------------------------------------------

// Homogeneous weights on a log-concave integer target with tail ratio k:
// checks E[min{1,kZ}] > E[min{1,Z/k}] for Z = W1/W2 (iid), and classifies
// the induced tail birth-death chain (p = theta E[min{1,Z/k}],
// q = (1-theta) E[min{1,kZ}]).
struct HomogeneousTailReport {
  double k = 0.0;
  double e_min_up = 0.0;    // E[min{1, Z/k}]
  double e_min_down = 0.0;  // E[min{1, kZ}]
  double difference = 0.0;  // down - up
  double std_error = 0.0;
  double sigmas = 0.0;
  bool exact = false;
  bool inequality_holds = false;
  WalkClassification induced;
};

HomogeneousTailReport homogeneous_tail_check(const WeightModel& weights, int N,
                                             double k, double theta,
                                             long draws, RngStream rng);

// Tail log-slope h(m+1) - h(m) of a discrete target at a probe state;
// exp of it is the k used above.
double tail_log_slope(const TargetSpec& target, std::int64_t m_probe);

// Binomial-average families: per-N exact classification plus the tail
// limit-ratio diagnostic lim q(m)/p(m) evaluated from the eps-sequence
// ratio limit when that limit exists.
struct BinomialFamilyEntry {
  int N = 0;
  WalkClassification cls;
  double eps_ratio_limit = 0.0;  // estimated lim eps_{m-1}/eps_m
  bool eps_ratio_exists = false;
  double limit_ratio_display = 0.0;  // predicted lim q/p from the ratio limit
};

std::vector<BinomialFamilyEntry> binomial_family_classification(
    const Sequence& b_m, const Sequence& eps_m, double theta,
    const std::vector<int>& N_list, const ClassifyOptions& options = {});

}  // namespace nmh
