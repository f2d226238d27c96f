// Weight-distribution families Q_{x,N}: state-indexed, mean-one, a.s.
// strictly positive.  Every family supports sampling; the two-point and
// binomial families additionally support exact finite-support enumeration
// (an average of N two-point draws is a rescaled binomial with N+1 atoms).
//
// The moment / tail analyzers and the condition checkers (W1)-(W5) below
// report grid evidence only: a supremum over the probed states is a grid
// supremum, never a claim about the full state space.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nmh/rng.hpp"
#include "nmh/state.hpp"

namespace nmh {

// State-indexed parameter sequence m -> value, m >= 1.
class Sequence {
 public:
  static Sequence constant(double c);
  static Sequence identity();           // m
  static Sequence reciprocal();         // 1/m
  static Sequence three_cycle_decay();  // m^{-(3 - (m mod 3))}
  static Sequence table(std::vector<double> values);  // values[m-1]

  double operator()(std::int64_t m) const;
  bool is_constant() const { return tag_ == Tag::constant; }
  double constant_value() const { return c_; }
  std::string tag_name() const;
  nlohmann::json to_json() const;
  static Sequence from_json(const nlohmann::json& j);

 private:
  enum class Tag { constant, identity, reciprocal, three_cycle, table };
  Tag tag_ = Tag::constant;
  double c_ = 1.0;
  std::shared_ptr<const std::vector<double>> values_;
};

struct WeightAtom {
  double value;
  double prob;
};

class WeightModel {
 public:
  enum class Family {
    unit,
    homogeneous_lognormal,
    two_point_homogeneous,
    two_point_inhomogeneous,
    binomial_average,
    custom,
  };

  WeightModel() = default;  // unit weights

  static WeightModel unit();
  // W = exp(G), G ~ Normal(-sigma2/2, sigma2); N-averages of iid copies.
  static WeightModel homogeneous_lognormal(double sigma2);
  // W = (b - eps) Bernoulli(s) + eps with s = (1-eps)/(b-eps); N-averages.
  static WeightModel two_point_homogeneous(double b, double eps);
  static WeightModel two_point_inhomogeneous(double b, Sequence eps_m);
  static WeightModel binomial_average(Sequence b_m, Sequence eps_m);
  // Arbitrary mean-one sampler (e.g. particle-filter likelihood ratios).
  static WeightModel custom(std::string name,
                            std::function<double(const State&, int, RngStream&)> sampler,
                            bool homogeneous);
  // Same, but sampled on the log scale; keeps ratios of extremely small
  // weights finite inside the kernels.
  static WeightModel custom_log(std::string name,
                                std::function<double(const State&, int, RngStream&)> log_sampler,
                                bool homogeneous);

  Family family() const { return family_; }
  const std::string& name() const { return name_; }
  bool is_homogeneous() const { return homogeneous_; }
  bool enumerable() const;

  // One draw from Q_{x,N}.  Throws on a non-positive result.
  double sample(const State& x, int N, RngStream& rng) const;

  // One draw of log W_{x,N}; never underflows.  Kernels use this form.
  double sample_log(const State& x, int N, RngStream& rng) const;

  // Exact support of Q_{x,N} (N+1 atoms for the two-point/binomial
  // families, a single atom for unit weights).  Throws
  // UnsupportedOperation for infinite-support families.
  std::vector<WeightAtom> enumerate(const State& x, int N) const;

  // Family parameters at a state (two-point/binomial families only).
  double b_at(std::int64_t m) const;
  double eps_at(std::int64_t m) const;
  double success_prob_at(std::int64_t m) const;
  double lognormal_sigma2() const { return sigma2_; }

  nlohmann::json to_json() const;
  static WeightModel from_json(const nlohmann::json& j);

 private:
  Family family_ = Family::unit;
  std::string name_ = "unit";
  bool homogeneous_ = true;
  bool custom_is_log_ = false;
  double sigma2_ = 0.0;
  Sequence b_seq_;
  Sequence eps_seq_;
  std::function<double(const State&, int, RngStream&)> custom_sampler_;

  std::int64_t index_of(const State& x) const;
};

// --- estimation modes -----------------------------------------------------

struct Mode {
  enum class Kind { automatic, exact, mc };
  Kind kind = Kind::automatic;
  long draws = 100000;

  static Mode exact() { return {Kind::exact, 0}; }
  static Mode mc(long draws) { return {Kind::mc, draws}; }
  static Mode automatic(long draws = 100000) { return {Kind::automatic, draws}; }
};

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for exact results
  bool exact = true;
};

// One draw, with the positivity guard of sample().
double sample_weight(const WeightModel& model, const State& x, int N,
                     RngStream& rng);

std::vector<WeightAtom> enumerate_weight(const WeightModel& model,
                                         const State& x, int N);

// E[W_{x,N}^{-p}].  Exact for finite support and for the lognormal family
// at N=1 (closed form); MC otherwise.  A support atom at zero reports +inf.
MomentEstimate negative_moment(const WeightModel& model, const State& x,
                               int N, double p, Mode mode = Mode::automatic());

// P[|W_{x,N} - 1| >= delta].
MomentEstimate tail_probability(const WeightModel& model, const State& x,
                                int N, double delta,
                                Mode mode = Mode::automatic());

// E[min{1, k W_{y,N} / W_{x,N}}] with independent weights at x and y.
MomentEstimate expected_min_ratio(const WeightModel& model, const State& x,
                                  const State& y, int N, double k,
                                  Mode mode = Mode::automatic());

// E[W_x^{1+k}] of the base (N=1) weight; exact where possible.
MomentEstimate plus_moment(const WeightModel& model, const State& x, double k,
                           Mode mode = Mode::automatic());

// E[W_x 1{W_x > K}] of the base weight (uniform-integrability statistic).
MomentEstimate truncated_mean(const WeightModel& model, const State& x,
                              double K, Mode mode = Mode::automatic());

// --- condition checkers ---------------------------------------------------

// W1: sup_x P[|W_{x,N}-1| >= delta] -> 0 as N -> infinity.
// W2: sup_x E[W_{x,N}^{-1}] -> 1.
// W3: sup_x E[W_x 1{W_x > K}] -> 0 as K -> infinity (base weights).
// W4: P[W_x <= w] <= M w^beta on (0, gamma), uniformly in x.
// W5: sup_x E[W_x^{1+k}] < infinity.
enum class Condition { W1, W2, W3, W4, W5 };

struct ConditionParams {
  double delta = 0.5;            // W1
  std::vector<double> K_values;  // W3 truncation levels (default set if empty)
  double gamma = 0.9;            // W4 window
  double beta = 0.0;             // W4 candidate exponent; 0 => fit
  double M = 0.0;                // W4 candidate constant; 0 => fit
  double k = 1.0;                // W5 exponent
  long mc_draws = 100000;
  double satisfied_tol = 0.05;   // "small at the largest probe" threshold
};

struct ConditionEntry {
  std::int64_t state;
  int N;           // or K index for W3; 1 for W4/W5
  double aux;      // delta / K / w as applicable
  double statistic;
};

struct ConditionReport {
  Condition condition;
  std::vector<std::int64_t> grid;
  std::vector<int> N_values;
  std::vector<ConditionEntry> table;
  std::vector<double> per_probe_sup;  // grid-sup per N (W1/W2) or per K (W3)

  enum class Verdict { satisfied_on_grid, violated, inconclusive };
  Verdict verdict = Verdict::inconclusive;
  std::optional<ConditionEntry> witness;  // present when violated

  double fitted_M = 0.0, fitted_beta = 0.0, gamma = 0.0;  // W4 only
  std::string note;

  std::string verdict_name() const;
  nlohmann::json to_json() const;
};

ConditionReport check_condition(const WeightModel& model, Condition which,
                                const std::vector<std::int64_t>& grid,
                                const std::vector<int>& N_values,
                                ConditionParams params = {});

std::string condition_name(Condition c);

}  // namespace nmh
