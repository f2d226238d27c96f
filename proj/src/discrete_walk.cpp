#include "nmh/discrete_walk.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include "nmh/errors.hpp"

namespace nmh {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BirthDeathSpec noisy_birth_death(const TargetSpec& target, double theta,
                                 const WeightModel& weights, int N) {
  if (!weights.enumerable())
    throw UnsupportedOperation("noisy_birth_death: weights not enumerable");
  KernelSpec spec;
  spec.kind = KernelSpec::Kind::noisy;
  spec.target = target;
  spec.proposal = integer_walk(theta);
  spec.weights = weights;
  spec.N = N;
  BirthDeathSpec bd;
  bd.source = "exact-noisy";
  bd.up = [spec, theta](std::int64_t m) {
    return theta *
           tilde_alpha(spec, State::integer(m), State::integer(m + 1),
                       Mode::exact()).value;
  };
  bd.down = [spec, theta](std::int64_t m) {
    if (m <= 1) return 0.0;
    return (1.0 - theta) *
           tilde_alpha(spec, State::integer(m), State::integer(m - 1),
                       Mode::exact()).value;
  };
  return bd;
}

BirthDeathSpec marginal_birth_death(const TargetSpec& target, double theta) {
  ProposalSpec prop = integer_walk(theta);
  BirthDeathSpec bd;
  bd.source = "exact-marginal";
  bd.up = [target, prop, theta](std::int64_t m) {
    return theta *
           marginal_alpha(target, prop, State::integer(m), State::integer(m + 1));
  };
  bd.down = [target, prop, theta](std::int64_t m) {
    if (m <= 1) return 0.0;
    return (1.0 - theta) *
           marginal_alpha(target, prop, State::integer(m), State::integer(m - 1));
  };
  return bd;
}

BirthDeathSpec constant_birth_death(double p, double q) {
  if (!(p >= 0) || !(q >= 0) || p + q > 1.0)
    throw InvalidSpec("constant_birth_death: need p,q >= 0 and p+q <= 1");
  BirthDeathSpec bd;
  bd.source = "user-table";
  bd.up = [p](std::int64_t) { return p; };
  bd.down = [q](std::int64_t m) { return m <= 1 ? 0.0 : q; };
  return bd;
}

BirthDeathSpec birth_death_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw InvalidSpec("birth-death CSV: empty input");
  // Header "m,p,q" (tolerate whitespace).
  auto table_p = std::make_shared<std::vector<double>>();
  auto table_q = std::make_shared<std::vector<double>>();
  long expect = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    long m;
    double p, q;
    if (!std::getline(row, cell, ',')) throw InvalidSpec("birth-death CSV: bad row");
    m = std::stol(cell);
    if (!std::getline(row, cell, ',')) throw InvalidSpec("birth-death CSV: bad row");
    p = std::stod(cell);
    if (!std::getline(row, cell, ',')) throw InvalidSpec("birth-death CSV: bad row");
    q = std::stod(cell);
    if (m != expect)
      throw InvalidSpec("birth-death CSV: rows must cover m=1.. contiguously");
    if (p < 0 || q < 0 || p + q > 1.0 + 1e-12)
      throw InvalidSpec("birth-death CSV: invalid probabilities at m=" +
                        std::to_string(m));
    table_p->push_back(p);
    table_q->push_back(q);
    ++expect;
  }
  if (table_p->empty()) throw InvalidSpec("birth-death CSV: no rows");
  BirthDeathSpec bd;
  bd.source = "user-table";
  bd.up = [table_p](std::int64_t m) {
    if (m < 1 || static_cast<std::size_t>(m) > table_p->size())
      throw InvalidSpec("birth-death table: m out of range");
    return (*table_p)[static_cast<std::size_t>(m - 1)];
  };
  bd.down = [table_q](std::int64_t m) {
    if (m <= 1) return 0.0;
    if (static_cast<std::size_t>(m) > table_q->size())
      throw InvalidSpec("birth-death table: m out of range");
    return (*table_q)[static_cast<std::size_t>(m - 1)];
  };
  return bd;
}

const char* WalkClassification::verdict_name() const {
  switch (verdict) {
    case Verdict::transient: return "transient";
    case Verdict::recurrent_null: return "recurrent-null";
    case Verdict::positive_recurrent: return "positive-recurrent";
    case Verdict::geometrically_ergodic: return "geometrically-ergodic";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string WalkClassification::summary() const {
  std::ostringstream os;
  os << "verdict=" << verdict_name() << " (M=" << truncation << ", tol=" << tol
     << ")\n";
  os << "  S_rec(M)=" << recurrence_series.partial_sum
     << " tail-increments [" << recurrence_series.min_tail_increment << ", "
     << recurrence_series.max_tail_increment << "]"
     << (recurrence_series.converged
             ? " converged"
             : recurrence_series.diverged ? " diverged" : " unresolved")
     << "\n";
  os << "  S_pos(M)=" << positivity_series.partial_sum
     << " tail-increments [" << positivity_series.min_tail_increment << ", "
     << positivity_series.max_tail_increment << "]"
     << (positivity_series.converged
             ? " converged"
             : positivity_series.diverged ? " diverged" : " unresolved")
     << "\n";
  os << "  lim p ~ " << lim_p << ", lim q ~ " << lim_q
     << " (+/- " << lim_uncertainty << ")";
  return os.str();
}

namespace {

// Richardson extrapolation of f toward m -> infinity assuming an O(1/m)
// correction, after smoothing over a short window (handles short cycles).
double tail_limit(const std::function<double(std::int64_t)>& f, long M,
                  double* uncertainty) {
  auto smooth = [&](long m) {
    double acc = 0.0;
    for (long i = 0; i < 6; ++i) acc += f(m - i);
    return acc / 6.0;
  };
  double fM = smooth(M), fH = smooth(M / 2), fQ = smooth(M / 4);
  double l1 = 2.0 * fM - fH;
  double l2 = 2.0 * fH - fQ;
  if (uncertainty) *uncertainty = std::abs(l1 - l2);
  return l1;
}

}  // namespace

WalkClassification classify(const BirthDeathSpec& spec, long truncation,
                            double tol) {
  ClassifyOptions opt;
  opt.truncation = truncation;
  opt.tol = tol;
  return classify(spec, opt);
}

WalkClassification classify(const BirthDeathSpec& spec,
                            const ClassifyOptions& opt) {
  if (opt.truncation < 1000)
    throw std::domain_error("classify: truncation must be >= 1000");
  const long M = opt.truncation;

  WalkClassification out;
  out.truncation = M;
  out.tol = opt.tol;

  // All products as sums of logs; terms re-exponentiated with saturation.
  double log_rec = 0.0, log_pos = 0.0;
  double p_prev = spec.up(1);
  if (!(p_prev > 0.0))
    throw InvalidSpec("classify: p(1) must be positive");
  std::vector<double> terms_rec, terms_pos;
  terms_rec.reserve(static_cast<std::size_t>(M));
  terms_pos.reserve(static_cast<std::size_t>(M));
  double S_rec = 0.0, S_pos = 0.0;

  for (long m = 2; m <= M; ++m) {
    double p = spec.up(m);
    double q = spec.down(m);
    if (!(p > 0.0))
      throw InvalidSpec("classify: p(m)=0 at m=" + std::to_string(m));
    if (!(q > 0.0))
      throw InvalidSpec("classify: q(m)=0 at m=" + std::to_string(m));
    log_rec += std::log(q) - std::log(p);
    log_pos += std::log(p_prev) - std::log(q);
    double t_rec = log_rec > 690.0 ? kInf : std::exp(log_rec);
    double t_pos = log_pos > 690.0 ? kInf : std::exp(log_pos);
    terms_rec.push_back(t_rec);
    terms_pos.push_back(t_pos);
    S_rec = std::min(S_rec + t_rec, 1e300);
    S_pos = std::min(S_pos + t_pos, 1e300);
    p_prev = p;
  }

  auto judge = [&](const std::vector<double>& terms, double partial) {
    SeriesEvidence ev;
    ev.partial_sum = partial;
    ev.terms = static_cast<long>(terms.size());
    std::size_t half = terms.size() / 2;
    double mx = 0.0, mn = kInf;
    for (std::size_t i = half; i < terms.size(); ++i) {
      mx = std::max(mx, terms[i]);
      mn = std::min(mn, terms[i]);
    }
    ev.max_tail_increment = mx;
    ev.min_tail_increment = mn;
    ev.converged = mx < opt.tol;
    ev.diverged = partial > opt.divergence_threshold || mn >= opt.term_floor;
    return ev;
  };
  out.recurrence_series = judge(terms_rec, S_rec);
  out.positivity_series = judge(terms_pos, S_pos);

  out.lim_p = tail_limit(spec.up, M, &out.lim_uncertainty);
  double unc_q = 0.0;
  out.lim_q = tail_limit(spec.down, M, &unc_q);
  out.lim_uncertainty = std::max(out.lim_uncertainty, unc_q);

  using V = WalkClassification::Verdict;
  if (out.recurrence_series.converged) {
    out.verdict = V::transient;
  } else if (out.recurrence_series.diverged) {
    if (out.positivity_series.converged) {
      bool geometric = out.lim_p < out.lim_q - opt.limit_tol &&
                       out.lim_uncertainty < 10.0 * opt.limit_tol;
      out.verdict = geometric ? V::geometrically_ergodic : V::positive_recurrent;
    } else if (out.positivity_series.diverged) {
      out.verdict = V::recurrent_null;
    } else {
      out.verdict = V::inconclusive;
    }
  } else {
    out.verdict = V::inconclusive;
  }
  return out;
}

// --- proposition-style reports ----------------------------------------------

double tail_log_slope(const TargetSpec& target, std::int64_t m_probe) {
  double a = target.log_density(State::integer(m_probe));
  double b = target.log_density(State::integer(m_probe + 1));
  return a - b;  // h(m+1) - h(m)
}

HomogeneousTailReport homogeneous_tail_check(const WeightModel& weights, int N,
                                             double k, double theta,
                                             long draws, RngStream rng) {
  if (!weights.is_homogeneous())
    throw InvalidSpec("homogeneous_tail_check: weights must be homogeneous");
  HomogeneousTailReport rep;
  rep.k = k;

  const State probe = State::integer(1);
  if (weights.enumerable()) {
    rep.e_min_down = expected_min_ratio(weights, probe, probe, N, k,
                                        Mode::exact()).value;
    rep.e_min_up = expected_min_ratio(weights, probe, probe, N, 1.0 / k,
                                      Mode::exact()).value;
    rep.difference = rep.e_min_down - rep.e_min_up;
    rep.std_error = 0.0;
    rep.sigmas = rep.difference == 0.0 ? 0.0 : kInf;
    rep.exact = true;
  } else {
    // Paired draws: the same (W1, W2) feeds both expectations.
    double acc_d = 0, acc_u = 0, acc2 = 0;
    for (long i = 0; i < draws; ++i) {
      double z = weights.sample(probe, N, rng) / weights.sample(probe, N, rng);
      double d = std::min(1.0, k * z);
      double u = std::min(1.0, z / k);
      acc_d += d;
      acc_u += u;
      double diff = d - u;
      acc2 += diff * diff;
    }
    rep.e_min_down = acc_d / draws;
    rep.e_min_up = acc_u / draws;
    rep.difference = rep.e_min_down - rep.e_min_up;
    double var = std::max(0.0, acc2 / draws - rep.difference * rep.difference);
    rep.std_error = std::sqrt(var / draws);
    rep.sigmas = rep.std_error > 0 ? rep.difference / rep.std_error : 0.0;
    rep.exact = false;
  }
  rep.inequality_holds = rep.difference > 0.0;

  // Tail chain: up-moves accept with E[min{1,Z/k}], down-moves with
  // E[min{1,kZ}]; constants, so the classifier sees the limiting chain.
  double p = theta * rep.e_min_up;
  double q = (1.0 - theta) * rep.e_min_down;
  rep.induced = classify(constant_birth_death(p, q));
  return rep;
}

std::vector<BinomialFamilyEntry> binomial_family_classification(
    const Sequence& b_m, const Sequence& eps_m, double theta,
    const std::vector<int>& N_list, const ClassifyOptions& options) {
  std::vector<BinomialFamilyEntry> out;
  TargetSpec target = geometric_target();

  // Does lim eps_{m-1}/eps_m exist?  Compare tail estimates at two scales.
  const long M = options.truncation;
  auto ratio_at = [&](long m) { return eps_m(m - 1) / eps_m(m); };
  double rM = ratio_at(M), rH = ratio_at(M / 2);
  bool exists = std::abs(rM - rH) <=
                1e-3 * std::max({std::abs(rM), std::abs(rH), 1.0});

  for (int N : N_list) {
    BinomialFamilyEntry e;
    e.N = N;
    WeightModel w = WeightModel::binomial_average(b_m, eps_m);
    e.cls = classify(noisy_birth_death(target, theta, w, N), options);
    e.eps_ratio_exists = exists;
    if (exists) {
      double l = rM;
      e.eps_ratio_limit = l;
      double num = (1.0 - theta) * std::min(1.0, 2.0 * theta / (1.0 - theta) * l);
      double den = theta * std::min(1.0, (1.0 - theta) / (2.0 * theta * l));
      e.limit_ratio_display = num / den;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace nmh
