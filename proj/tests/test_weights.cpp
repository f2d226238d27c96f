#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "nmh/errors.hpp"
#include "nmh/weights.hpp"

using namespace nmh;

namespace {

// Independent binomial pmf oracle (plain double recurrence from j=0).
double binom_pmf_oracle(int N, int j, double s) {
  double c = 1.0;
  for (int i = 0; i < j; ++i) c = c * (N - i) / (i + 1);
  return c * std::pow(s, j) * std::pow(1.0 - s, N - j);
}

const double kFig7Eps = 2.0 - std::sqrt(3.0);
const double kFig7B = 2.0 * kFig7Eps * 0.75 / 0.25;  // 2 eps theta/(1-theta)

}  // namespace

TEST_CASE("two-point support and probabilities match the mean-one closure") {
  auto w = WeightModel::two_point_homogeneous(kFig7B, kFig7Eps);
  auto atoms = w.enumerate(State::integer(1), 1);
  REQUIRE(atoms.size() == 2);
  double s = (1.0 - kFig7Eps) / (kFig7B - kFig7Eps);
  CHECK(s == doctest::Approx(0.546410).epsilon(1e-5));
  CHECK(atoms[0].value == doctest::Approx(0.267949).epsilon(1e-5));
  CHECK(atoms[1].value == doctest::Approx(1.607695).epsilon(1e-5));
  CHECK(atoms[0].prob == doctest::Approx(1.0 - s).epsilon(1e-12));
  CHECK(atoms[1].prob == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("enumeration is exact: sums to one and mean-one, every variant") {
  std::vector<WeightModel> models = {
      WeightModel::unit(),
      WeightModel::two_point_homogeneous(kFig7B, kFig7Eps),
      WeightModel::two_point_inhomogeneous(4.0, Sequence::three_cycle_decay()),
      WeightModel::binomial_average(Sequence::identity(), Sequence::reciprocal()),
      WeightModel::binomial_average(Sequence::identity(),
                                    Sequence::three_cycle_decay()),
  };
  for (const auto& w : models)
    for (std::int64_t m : {1, 2, 6, 31, 200})
      for (int N : {1, 2, 3, 7, 20}) {
        auto atoms = w.enumerate(State::integer(m), N);
        double total = 0, mean = 0;
        for (const auto& a : atoms) {
          total += a.prob;
          mean += a.prob * a.value;
          CHECK(a.value > 0.0);
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        CHECK(std::abs(mean - 1.0) < 1e-12);
      }
}

TEST_CASE("binomial-average enumeration at m=6, N=3 matches the pmf oracle") {
  auto w = WeightModel::binomial_average(Sequence::identity(),
                                         Sequence::three_cycle_decay());
  auto atoms = w.enumerate(State::integer(6), 3);
  REQUIRE(atoms.size() == 4);
  double eps = std::pow(6.0, -3.0);
  double s = (1.0 - eps) / (6.0 - eps);
  for (int j = 0; j <= 3; ++j) {
    CHECK(atoms[j].value ==
          doctest::Approx((6.0 - eps) * j / 3.0 + eps).epsilon(1e-14));
    CHECK(atoms[j].prob ==
          doctest::Approx(binom_pmf_oracle(3, j, s)).epsilon(1e-12));
  }
}

TEST_CASE("enumerate refuses infinite-support families") {
  auto w = WeightModel::homogeneous_lognormal(5.0);
  CHECK_THROWS_AS(w.enumerate(State::integer(1), 1), UnsupportedOperation);
  CHECK(!w.enumerable());
}

TEST_CASE("unit weights sample exactly one and consume no randomness") {
  auto w = WeightModel::unit();
  RngStream a(1, 0), b(1, 0);
  CHECK(w.sample(State::integer(3), 5, a) == 1.0);
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("lognormal sample mean is near one") {
  auto w = WeightModel::homogeneous_lognormal(5.0);
  RngStream rng(21, 0);
  const long n = 1000000;
  double acc = 0;
  for (long i = 0; i < n; ++i) acc += w.sample(State::integer(1), 1, rng);
  double mean = acc / static_cast<double>(n);
  CHECK(mean > 0.97);
  CHECK(mean < 1.03);
}

TEST_CASE("average-variant samples equal arithmetic means of base draws") {
  auto w = WeightModel::two_point_homogeneous(kFig7B, kFig7Eps);
  RngStream rng(5, 0);
  for (int rep = 0; rep < 100; ++rep) {
    double v = w.sample(State::integer(1), 4, rng);
    // Every draw must be one of the five binomial atoms.
    bool matched = false;
    for (int j = 0; j <= 4; ++j)
      if (std::abs(v - ((kFig7B - kFig7Eps) * j / 4.0 + kFig7Eps)) < 1e-12)
        matched = true;
    CHECK(matched);
  }
}

TEST_CASE("negative moment: closed form, exact sums, trivials") {
  auto ln = WeightModel::homogeneous_lognormal(5.0);
  auto nm = negative_moment(ln, State::integer(1), 1, 1.0, Mode::exact());
  CHECK(nm.exact);
  CHECK(nm.value == doctest::Approx(std::exp(5.0)).epsilon(1e-12));

  auto unit = WeightModel::unit();
  for (double p : {0.5, 1.0, 3.0})
    CHECK(negative_moment(unit, State::integer(1), 1, p).value == 1.0);

  // Exact mode on a lognormal average has no closed form.
  CHECK_THROWS_AS(negative_moment(ln, State::integer(1), 2, 1.0, Mode::exact()),
                  UnsupportedOperation);
}

TEST_CASE("negative moments decrease in N (exact enumeration)") {
  auto w = WeightModel::two_point_homogeneous(kFig7B, kFig7Eps);
  for (double p : {0.5, 1.0, 2.0}) {
    double prev = 1e300;
    for (int N = 1; N <= 10; ++N) {
      double cur = negative_moment(w, State::integer(1), N, p, Mode::exact()).value;
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("tail probability: trivial and two-point exact cases") {
  CHECK(tail_probability(WeightModel::unit(), State::integer(1), 1, 0.5).value ==
        0.0);
  auto w = WeightModel::two_point_homogeneous(kFig7B, kFig7Eps);
  // Both atoms deviate from 1 by more than 0.5.
  auto tp = tail_probability(w, State::integer(1), 1, 0.5, Mode::exact());
  CHECK(tp.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lognormal tail probability decreases in N (common random numbers)") {
  // Prefix means over a single base-draw panel give the N-averages coupled
  // draws, so the comparison is noise-free in the coupling sense.
  RngStream rng(33, 0);
  const int reps = 4000;
  const double mean = -2.5, sd = std::sqrt(5.0);
  double tails[4] = {0, 0, 0, 0};
  const int Ns[4] = {1, 10, 100, 1000};
  for (int r = 0; r < reps; ++r) {
    double acc = 0.0;
    int idx = 0;
    for (int i = 1; i <= 1000; ++i) {
      acc += std::exp(rng.normal(mean, sd));
      if (idx < 4 && i == Ns[idx]) {
        if (std::abs(acc / i - 1.0) >= 0.5) tails[idx] += 1.0;
        ++idx;
      }
    }
  }
  CHECK(tails[0] > tails[1]);
  CHECK(tails[1] > tails[2]);
  CHECK(tails[2] > tails[3]);
}

TEST_CASE("expected min ratio: symmetry, saturation, trivials") {
  auto unit = WeightModel::unit();
  for (double k : {0.3, 1.0, 2.5})
    CHECK(expected_min_ratio(unit, State::integer(1), State::integer(2), 1, k)
              .value == doctest::Approx(std::min(1.0, k)).epsilon(1e-15));

  auto w = WeightModel::two_point_homogeneous(kFig7B, kFig7Eps);
  auto a = expected_min_ratio(w, State::integer(1), State::integer(1), 1, 1.0,
                              Mode::exact());
  // Z and 1/Z are identically distributed under homogeneity, so the k=1
  // value must be symmetric under inversion; check against the direct sum.
  double direct = 0.0;
  auto atoms = w.enumerate(State::integer(1), 1);
  for (const auto& au : atoms)
    for (const auto& aw : atoms)
      direct += au.prob * aw.prob * std::min(1.0, aw.value / au.value);
  CHECK(a.value == doctest::Approx(direct).epsilon(1e-12));

  // k = 2 theta/(1-theta) = 6 saturates every atom pair.
  auto sat = expected_min_ratio(w, State::integer(1), State::integer(1), 1, 6.0,
                                Mode::exact());
  CHECK(sat.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("left-tail bound of sums (toy oracle)") {
  // For independent Z_i ~ Beta(alpha_i, 1): P[Z_i <= z] = z^{alpha_i}, so
  // P[sum Z_i <= z] <= z^{sum alpha_i} on (0,1).  MC against the bound.
  RngStream rng(8, 0);
  const double alphas[3] = {0.7, 1.3, 2.0};
  const double alpha_sum = 4.0;
  const long reps = 200000;
  for (double z : {0.3, 0.6, 0.9}) {
    long hits = 0;
    RngStream r2 = rng;
    for (long i = 0; i < reps; ++i) {
      double sum = 0.0;
      for (double a : alphas) sum += std::pow(r2.uniform01_pos(), 1.0 / a);
      if (sum <= z) ++hits;
    }
    double phat = static_cast<double>(hits) / reps;
    double bound = std::pow(z, alpha_sum);
    double se = std::sqrt(bound * (1 - bound) / reps);
    CHECK(phat <= bound + 3 * se);
  }
}

TEST_CASE("negative-moment bound from a left-tail power law") {
  // Z ~ Beta(alpha,1): E[Z^-p] = alpha/(alpha-p); the tail-integral bound
  // with M = 1 must dominate it for every gamma in (0,1).
  for (double alpha : {2.0, 3.5})
    for (double p : {0.5, 1.0})
      for (double gamma : {0.5, 0.9}) {
        double exact = alpha / (alpha - p);
        double bound = std::pow(gamma, -p) +
                       p * std::pow(gamma, alpha - p) / (alpha - p);
        CHECK(exact <= bound + 1e-12);
      }
}

TEST_CASE("condition checks: trivial satisfied, structural violations") {
  std::vector<std::int64_t> grid;
  for (std::int64_t m = 1; m <= 300; ++m) grid.push_back(m);

  auto rep_unit = check_condition(WeightModel::unit(), Condition::W1, {1, 2, 3},
                                  {1, 2, 4});
  CHECK(rep_unit.verdict == ConditionReport::Verdict::satisfied_on_grid);
  for (double s : rep_unit.per_probe_sup) CHECK(s == 0.0);

  auto w_inhom =
      WeightModel::two_point_inhomogeneous(4.0, Sequence::three_cycle_decay());
  auto rep_w1 = check_condition(w_inhom, Condition::W1, grid, {1});
  CHECK(rep_w1.verdict == ConditionReport::Verdict::violated);
  REQUIRE(rep_w1.witness.has_value());
  CHECK(rep_w1.witness->statistic > 0.9);

  ConditionParams p5;
  p5.k = 1.0;
  auto ln = WeightModel::homogeneous_lognormal(5.0);
  auto rep_w5 = check_condition(ln, Condition::W5, {1}, {1}, p5);
  CHECK(rep_w5.verdict == ConditionReport::Verdict::satisfied_on_grid);
  CHECK(rep_w5.per_probe_sup[0] == doctest::Approx(std::exp(5.0)).epsilon(1e-9));

  // b_m = m blows the second moment up along the grid.
  auto grow = WeightModel::binomial_average(Sequence::identity(),
                                            Sequence::reciprocal());
  auto rep_grow = check_condition(grow, Condition::W5, grid, {1}, p5);
  CHECK(rep_grow.verdict == ConditionReport::Verdict::violated);

  // ... and fails uniform integrability too (truncation levels inside the
  // grid's weight range).
  ConditionParams p3;
  p3.K_values = {2.0, 10.0, 50.0};
  auto rep_w3 = check_condition(grow, Condition::W3, grid, {1}, p3);
  CHECK(rep_w3.verdict == ConditionReport::Verdict::violated);
}

TEST_CASE("weight positivity violations raise") {
  auto bad = WeightModel::custom(
      "broken", [](const State&, int, RngStream&) { return 0.0; }, true);
  RngStream rng(1, 0);
  CHECK_THROWS_AS(bad.sample(State::integer(1), 1, rng), std::runtime_error);
  CHECK_THROWS_AS(WeightModel::two_point_homogeneous(0.9, 0.5), InvalidSpec);
  CHECK_THROWS_AS(WeightModel::two_point_homogeneous(2.0, 1.5), InvalidSpec);
}

TEST_CASE("state-indexed families reject invalid states") {
  auto w = WeightModel::two_point_inhomogeneous(4.0, Sequence::reciprocal());
  RngStream rng(1, 0);
  CHECK_THROWS_AS(w.sample(State::integer(0), 1, rng), std::domain_error);
  CHECK_THROWS_AS(w.sample(State::scalar(1.0), 1, rng), std::domain_error);
}

TEST_CASE("weight model JSON round trip preserves behavior") {
  std::vector<WeightModel> models = {
      WeightModel::unit(),
      WeightModel::homogeneous_lognormal(5.0),
      WeightModel::two_point_homogeneous(kFig7B, kFig7Eps),
      WeightModel::two_point_inhomogeneous(4.0, Sequence::three_cycle_decay()),
      WeightModel::binomial_average(Sequence::identity(), Sequence::reciprocal()),
  };
  for (const auto& w : models) {
    auto w2 = WeightModel::from_json(w.to_json());
    RngStream a(9, 0), b(9, 0);
    for (int i = 0; i < 50; ++i)
      CHECK(w.sample(State::integer(7), 3, a) ==
            w2.sample(State::integer(7), 3, b));
  }
}
