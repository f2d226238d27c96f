#include <doctest.h>

#include <cmath>

#include "nmh/chain.hpp"
#include "nmh/diagnostics.hpp"
#include "nmh/errors.hpp"

using namespace nmh;

namespace {

std::vector<double> iid_normal(long n, RngStream& rng) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (auto& x : xs) x = rng.normal();
  return xs;
}

std::int64_t sample_geometric_half(RngStream& rng) {
  std::int64_t m = 1;
  while (rng.bernoulli(0.5)) ++m;
  return m;
}

KernelSpec fig7_noisy() {
  double eps = 2.0 - std::sqrt(3.0);
  double theta = 0.75;
  KernelSpec spec;
  spec.kind = KernelSpec::Kind::noisy;
  spec.target = geometric_target();
  spec.proposal = integer_walk(theta);
  spec.weights =
      WeightModel::two_point_homogeneous(2.0 * eps * theta / (1 - theta), eps);
  spec.N = 1;
  return spec;
}

}  // namespace

TEST_CASE("acf: iid noise stays inside the 1/sqrt(n) envelope") {
  RngStream rng(3, 0);
  auto xs = iid_normal(100000, rng);
  auto ac = acf(xs, 100);
  CHECK(ac[0] == 1.0);
  for (int k = 1; k <= 100; ++k) CHECK(std::abs(ac[k]) < 0.02);
}

TEST_CASE("acf: AR(1) autocorrelation matches 0.8^k") {
  RngStream rng(4, 0);
  const long n = 100000;
  std::vector<double> xs(n);
  double x = 0.0;
  const double innov_sd = std::sqrt(1.0 - 0.64);
  for (long i = 0; i < n; ++i) {
    x = 0.8 * x + rng.normal(0.0, innov_sd);
    xs[static_cast<std::size_t>(i)] = x;
  }
  auto ac = acf(xs, 10);
  for (int k = 1; k <= 10; ++k)
    CHECK(std::abs(ac[k] - std::pow(0.8, k)) < 0.05);
}

TEST_CASE("acf: constant series flags degeneracy") {
  std::vector<double> xs(1000, 3.0);
  bool degenerate = false;
  auto ac = acf(xs, 5, &degenerate);
  CHECK(degenerate);
  for (double v : ac) CHECK(v == 1.0);
}

TEST_CASE("acf: series must be longer than the max lag") {
  std::vector<double> xs(10, 0.0);
  CHECK_THROWS_AS(acf(xs, 10), std::domain_error);
}

TEST_CASE("empirical TV, discrete: iid sample and point mass") {
  RngStream rng(5, 0);
  std::vector<std::int64_t> sample;
  sample.reserve(1000000);
  for (int i = 0; i < 1000000; ++i) sample.push_back(sample_geometric_half(rng));
  CHECK(empirical_tv(sample, geometric_target()) < 0.005);

  std::vector<std::int64_t> point(10000, 1);
  CHECK(empirical_tv(point, geometric_target()) ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("empirical TV halves when the sample doubles") {
  RngStream rng(6, 0);
  const int reps = 20;
  double tv_small = 0, tv_big = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<std::int64_t> a, b;
    for (int i = 0; i < 20000; ++i) a.push_back(sample_geometric_half(rng));
    for (int i = 0; i < 40000; ++i) b.push_back(sample_geometric_half(rng));
    tv_small += empirical_tv(a, geometric_target());
    tv_big += empirical_tv(b, geometric_target());
  }
  double ratio = tv_small / tv_big;
  CHECK(ratio > 4.0 / 3.0);
  CHECK(ratio < 3.0);
}

TEST_CASE("empirical TV, binned: iid normals against the normal target") {
  RngStream rng(7, 0);
  auto xs = iid_normal(1000000, rng);
  double tv = empirical_tv(std::span<const double>(xs), std_normal_target(),
                           {TvOptions::Method::binned, 50, -4.0, 4.0});
  CHECK(tv < 0.01);
}

TEST_CASE("empirical TV rejects empty post-burnin traces") {
  ChainTrace trace;
  trace.states = {State::integer(1)};
  CHECK_THROWS_AS(empirical_tv(trace, geometric_target(), 5,
                               {TvOptions::Method::exact_pmf, 0, 0, 0}),
                  std::domain_error);
}

TEST_CASE("drift ratio: exact three-term sums at the known presets") {
  auto transient = fig7_noisy();
  auto V_out = [](const State& s) {
    return std::pow(4.0 / 3.0, static_cast<double>(s.as_integer()));
  };
  double r1 = drift_ratio(transient, V_out, State::integer(50), Mode::exact());
  CHECK(r1 > 1.0);
  CHECK(r1 == doctest::Approx(1.02219).epsilon(1e-4));

  KernelSpec marg;
  marg.kind = KernelSpec::Kind::noisy;
  marg.target = geometric_target();
  marg.proposal = integer_walk(0.5);
  marg.weights = WeightModel::unit();
  auto V_sqrtpi = [](const State& s) {
    return std::pow(2.0, static_cast<double>(s.as_integer()) / 2.0);
  };
  double r2 = drift_ratio(marg, V_sqrtpi, State::integer(50), Mode::exact());
  CHECK(r2 < 1.0);
  CHECK(r2 == doctest::Approx(0.95711).epsilon(1e-4));

  auto V_one = [](const State&) { return 1.0; };
  CHECK(drift_ratio(marg, V_one, State::integer(50), Mode::exact()) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("drift ratio: MC mode agrees with the exact sum") {
  auto spec = fig7_noisy();
  auto V = [](const State& s) {
    return std::pow(1.1, static_cast<double>(s.as_integer()));
  };
  const State x = State::integer(30);
  double exact = drift_ratio(spec, V, x, Mode::exact());
  const long draws = 40000;
  double mc = drift_ratio(spec, V, x, Mode::mc(draws));
  // Per-step values live in [V(29), V(31)]/V(30); Popoviciu bounds the SE.
  double lo = V(State::integer(29)) / V(x), hi = V(State::integer(31)) / V(x);
  double se_bound = (hi - lo) / (2.0 * std::sqrt(static_cast<double>(draws)));
  CHECK(std::abs(mc - exact) <= 4.0 * se_bound);
}

TEST_CASE("tv rate bound: closed cases and failure modes") {
  TvRateParams params{1.0, 0.5, [](int) { return 100.0; }};
  auto got = tv_rate_bound(params, 1);
  CHECK(got.argmin_n == 7);
  CHECK(got.bound == doctest::Approx(2.0 * std::pow(0.5, 7) + 0.07).epsilon(1e-15));

  // tau -> 0: one step dominates and the bound approaches 2R tau + 1/r.
  TvRateParams tiny{1.0, 1e-9, [](int) { return 100.0; }};
  auto t = tv_rate_bound(tiny, 1);
  CHECK(t.argmin_n == 1);
  CHECK(t.bound == doctest::Approx(0.01 + 2e-9).epsilon(1e-12));

  TvRateParams small_r{1.0, 0.5, [](int) { return 1.0; }};
  CHECK_THROWS_AS(tv_rate_bound(small_r, 1), InconclusiveBound);
}

TEST_CASE("mean acceptance: trivial and long-run two-point value") {
  ChainTrace rejected;
  rejected.states = {State::integer(1), State::integer(1), State::integer(1)};
  rejected.accepted = {false, false};
  CHECK(mean_acceptance(rejected) == 0.0);
  ChainTrace empty;
  CHECK_THROWS_AS(mean_acceptance(empty), std::domain_error);

  // Away from the boundary the two-point chain accepts at p + q.
  auto spec = fig7_noisy();
  auto trace = run_chain(spec, State::integer(1000), 100000, RngStream(19, 0));
  double acc = mean_acceptance(trace);
  double expect = 0.2540865 + 0.25;
  CHECK(std::abs(acc - expect) <= 4.0 * std::sqrt(expect * (1 - expect) / 100000));
}

TEST_CASE("one-step TV between noisy and marginal shrinks with N") {
  auto spec = fig7_noisy();
  double prev = 1.0;
  for (int N : {1, 4, 16, 64}) {
    spec.N = N;
    double tv = one_step_tv_discrete(spec, State::integer(12));
    CHECK(tv < prev);
    prev = tv;
  }
}

TEST_CASE("one-step TV on the continuous model decreases in N (MC)") {
  // TV(x) = (1/2)(E_q |a_N - a| + |E_q (a_N - a)|), estimated with a
  // fixed proposal panel and per-proposal weight pairs reusing stream ids
  // across N.
  KernelSpec spec;
  spec.kind = KernelSpec::Kind::noisy;
  spec.target = std_normal_target();
  spec.proposal = gaussian_walk(4.0, 1);
  spec.weights = WeightModel::homogeneous_lognormal(5.0);

  auto sup_tv = [&](int N) {
    spec.N = N;
    double worst = 0.0;
    for (double x0 : {0.0, 1.0, 2.0}) {
      const State x = State::scalar(x0);
      RngStream prop_rng(61, static_cast<std::uint64_t>(x0 * 8));
      double abs_acc = 0.0, acc = 0.0;
      const int y_draws = 24, pairs = 600;
      for (int j = 0; j < y_draws; ++j) {
        State y = spec.proposal.sample(x, prop_rng);
        double a = marginal_alpha(spec.target, spec.proposal, x, y);
        RngStream wrng(62, static_cast<std::uint64_t>(j));  // shared over N
        double at = 0.0;
        double base = spec.target.log_density(y) - spec.target.log_density(x);
        for (int k = 0; k < pairs; ++k) {
          double lw = spec.weights.sample_log(x, N, wrng);
          double lu = spec.weights.sample_log(y, N, wrng);
          at += std::exp(std::min(0.0, base + lu - lw));
        }
        at /= pairs;
        abs_acc += std::abs(at - a);
        acc += at - a;
      }
      double tv = 0.5 * (abs_acc / y_draws + std::abs(acc / y_draws));
      worst = std::max(worst, tv);
    }
    return worst;
  };

  double t10 = sup_tv(10), t100 = sup_tv(100), t1000 = sup_tv(1000);
  CHECK(t10 > t100);
  CHECK(t100 > t1000);
}

TEST_CASE("drift ratio exact matches MC on random discrete cases") {
  RngStream pick(71, 0);
  for (int c = 0; c < 20; ++c) {
    KernelSpec spec;
    spec.kind = KernelSpec::Kind::noisy;
    spec.target = geometric_target();
    spec.proposal = integer_walk(0.3 + 0.4 * pick.uniform01());
    double b = 1.5 + 2.0 * pick.uniform01();
    double eps = 0.2 + 0.5 * pick.uniform01();
    spec.weights = WeightModel::two_point_homogeneous(b, eps);
    spec.N = 1 + static_cast<int>(pick.uniform_below(3));
    std::int64_t m = 5 + static_cast<std::int64_t>(pick.uniform_below(40));
    double base = 1.02 + 0.2 * pick.uniform01();
    auto V = [base](const State& s) {
      return std::pow(base, static_cast<double>(s.as_integer()));
    };
    const State x = State::integer(m);
    double exact = drift_ratio(spec, V, x, Mode::exact());
    const long draws = 20000;
    double mc = drift_ratio(spec, V, x, Mode::mc(draws));
    double lo = V(State::integer(m - 1)) / V(x);
    double hi = V(State::integer(m + 1)) / V(x);
    double se_bound = (hi - lo) / (2.0 * std::sqrt(static_cast<double>(draws)));
    CHECK(std::abs(mc - exact) <= 4.0 * se_bound);
  }
}
