#pragma once

// Iteration-frame exponent sequences for slowly decaying kernels (Case 1) and the
// slicing variant for fast kernels (Case 2), with closed forms, the weighted power
// sum, index thresholds and divergence certificates.
//
// Sequences are indexed from j = 1; element [j - 1] of each vector holds index j.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "memwave/error.hpp"
#include "memwave/exponents.hpp"
#include "memwave/kernels.hpp"
#include "memwave/rational.hpp"

namespace memwave {

/// One index of the Case 1 exponent sequences (U bound: a, alpha, b, beta; V bound: tilded).
template <class S>
struct Case1Tuple {
  S a, a_t, alpha, alpha_t, b, b_t, beta, beta_t;
};

/// Log-constant inputs; zero means the placeholder constant equals 1.
struct Case1Seeds {
  long double log_D1 = 0, log_Dt1 = 0;
  long double log_C0 = 0, log_Ct0 = 0;
  long double log_E0 = 0, log_Et0 = 0;
};

template <class S>
struct Case1Sequences {
  int n = 1;
  S p, q;
  std::vector<Case1Tuple<S>> terms;
  /// log D_j, log D~_j following the constant recursion from the seeds
  std::vector<long double> log_D, log_Dt;
  /// closed lower bound through the weighted power sum (odd j only, NaN otherwise)
  std::vector<long double> log_D_bound, log_Dt_bound;
};

template <class S>
S weighted_power_sum(int j, const S& pq);

template <class S>
Case1Sequences<S> case1_recursion(const S& p, const S& q, int n, int j_max, const Case1Seeds& seeds = {}) {
  if (j_max < 1) throw ConfigError("case1_recursion: j_max must be >= 1");
  Case1Sequences<S> out;
  out.n = n;
  out.p = p;
  out.q = q;
  const S nn = S(n);
  Case1Tuple<S> t{S(1), S(0), S(0), S(1), (nn - 1) * p / 2, (nn - 1) * q / 2, nn + 2, nn + 2};
  long double log_D = seeds.log_D1, log_Dt = seeds.log_Dt1;
  const long double pr = to_real(p), qr = to_real(q);
  for (int j = 1; j <= j_max; ++j) {
    out.terms.push_back(t);
    out.log_D.push_back(log_D);
    out.log_Dt.push_back(log_Dt);
    const long double bt = to_real(t.beta_t), b = to_real(t.beta);
    const long double next_D = seeds.log_C0 + pr * log_Dt - std::log(1 + bt * pr) - std::log(2 + bt * pr) -
                               std::log(3 + bt * pr);
    const long double next_Dt = seeds.log_Ct0 + qr * log_D - std::log(1 + b * qr) - std::log(2 + b * qr) -
                                std::log(3 + b * qr);
    Case1Tuple<S> nx{1 + t.a_t * p,         t.a * q,           t.alpha_t * p,
                     1 + t.alpha * q,       nn * (p - 1) + t.b_t * p, nn * (q - 1) + t.b * q,
                     3 + t.beta_t * p,      3 + t.beta * q};
    t = nx;
    log_D = next_D;
    log_Dt = next_Dt;
  }
  const long double pq = pr * qr, lpq = std::log(pq), d = pq - 1;
  for (int j = 1; j <= j_max; ++j) {
    if (j % 2 == 0) {
      out.log_D_bound.push_back(std::numeric_limits<long double>::quiet_NaN());
      out.log_Dt_bound.push_back(std::numeric_limits<long double>::quiet_NaN());
      continue;
    }
    const long double grow = std::pow(pq, (j - 1) / 2.0L);
    const long double tail = (2 * pq + j * d) * lpq / (2 * d * d);
    out.log_D_bound.push_back(grow * (seeds.log_D1 - 3 * (pr + 1) * (3 * pq - 1) * lpq / (2 * d * d) + seeds.log_E0 / d) +
                              3 * (pr + 1) * tail - seeds.log_E0 / d);
    out.log_Dt_bound.push_back(grow * (seeds.log_Dt1 - 3 * (qr + 1) * (3 * pq - 1) * lpq / (2 * d * d) + seeds.log_Et0 / d) +
                               3 * (qr + 1) * tail - seeds.log_Et0 / d);
  }
  return out;
}

/// beta_j, beta~_j in closed form for any j >= 1 (odd and even branches).
template <class S>
std::pair<S, S> case1_closed_beta(const S& p, const S& q, int n, int j) {
  if (j < 1) throw DomainError("case1_closed_beta: j must be >= 1");
  const S pq = p * q, d = pq - 1, nn = S(n);
  if (j % 2 == 1) {
    const S g = pow_int(pq, (j - 1) / 2);
    return {((nn + 2) * d + 3 * (p + 1)) / d * g - 3 * (p + 1) / d,
            ((nn + 2) * d + 3 * (q + 1)) / d * g - 3 * (q + 1) / d};
  }
  const S g = pow_int(pq, j / 2);
  return {((nn + 2) * d + 3 * (q + 1)) / (d * q) * g - 3 * (p + 1) / d,
          ((nn + 2) * d + 3 * (p + 1)) / (d * p) * g - 3 * (q + 1) / d};
}

/// All Case 1 exponents in closed form at odd j.
template <class S>
Case1Tuple<S> case1_closed_form(const S& p, const S& q, int n, int j) {
  if (j < 1) throw DomainError("case1_closed_form: j must be >= 1");
  if (j % 2 == 0) throw UnsupportedError("case1_closed_form: a, alpha, b closed forms exist for odd j only");
  const S pq = p * q, d = pq - 1, nn = S(n);
  const S g = pow_int(pq, (j - 1) / 2);
  Case1Tuple<S> t;
  t.a = pq / d * g - 1 / d;
  t.a_t = q / d * g - q / d;
  t.alpha = p / d * g - p / d;
  t.alpha_t = pq / d * g - 1 / d;
  t.b = ((nn - 1) * p + 2 * nn) / 2 * g - nn;
  t.b_t = ((nn - 1) * q + 2 * nn) / 2 * g - nn;
  auto [beta, beta_t] = case1_closed_beta(p, q, n, j);
  t.beta = beta;
  t.beta_t = beta_t;
  return t;
}

/// sum_{k=0}^{(j-3)/2} (j - 2k)(pq)^k in closed form (odd j >= 3).
template <class S>
S weighted_power_sum(int j, const S& pq) {
  if (j < 3 || j % 2 == 0) throw DomainError("sum_formula: j must be odd and >= 3");
  const S d = pq - 1;
  return (2 + 3 * d) / (d * d) * pow_int(pq, (j - 1) / 2) - (2 * pq + S(j) * d) / (d * d);
}

template <class S>
S sum_formula(int j, const S& pq) {
  return weighted_power_sum(j, pq);
}

template <class Real = long double>
struct SlicingSequence {
  std::vector<Real> ell;      // ell_k = 1 + (pq)^{-(k-1)/2}
  std::vector<Real> log_ell;  // ln ell_k, accurate after ell_k rounds to 1
  std::vector<Real> L;    // partial products
  Real L_estimate;        // product continued until ell_k - 1 < 1e-14
  int tail_index;         // index k at which the tail criterion was met
};

template <class Real = long double>
SlicingSequence<Real> slicing_sequence(Real pq, int j_max) {
  if (!(pq > 1)) throw DomainError("slicing_sequence: pq must exceed 1 for the product to converge");
  if (j_max < 1) throw ConfigError("slicing_sequence: j_max must be >= 1");
  SlicingSequence<Real> s;
  Real prod = 1;
  int k = 1;
  for (; k <= j_max; ++k) {
    const Real x = std::pow(pq, -Real(k - 1) / 2);
    const Real e = 1 + x;
    prod *= e;
    s.ell.push_back(e);
    s.log_ell.push_back(std::log1p(x));
    s.L.push_back(prod);
  }
  Real est = prod;
  k = 1;
  for (;; ++k) {
    const Real x = std::pow(pq, -Real(k - 1) / 2);
    if (k > j_max) est *= 1 + x;
    if (x < Real(1e-14)) break;
  }
  // the remaining tail prod(1 + x_m) for m > k is below exp(x_k / (sqrt(pq) - 1))
  s.L_estimate = est;
  s.tail_index = k;
  return s;
}

template <class S>
struct Case2Tuple {
  S theta, theta_t, sigma, sigma_t;
};

struct Case2Seeds {
  long double log_Q1 = 0, log_Qt1 = 0;
  long double log_C0 = 0, log_Ct0 = 0;
  long double log_C3 = 0, log_Ct3 = 0;
  long double log_E2 = 0, log_Et2 = 0;
};

template <class S>
struct Case2Sequences {
  int n = 1;
  S p, q;
  std::vector<Case2Tuple<S>> terms;
  std::vector<long double> ell, L;
  long double L_limit = 0;
  std::vector<long double> log_Q, log_Qt;
  std::vector<long double> log_Q_bound, log_Qt_bound;
};

template <class S>
Case2Sequences<S> case2_recursion(const S& p, const S& q, int n, int j_max, const Case2Seeds& seeds = {}) {
  if (j_max < 1) throw ConfigError("case2_recursion: j_max must be >= 1");
  Case2Sequences<S> out;
  out.n = n;
  out.p = p;
  out.q = q;
  const S nn = S(n);
  Case2Tuple<S> t{(nn - 1) * p / 2, (nn - 1) * q / 2, nn + 1, nn + 1};
  const long double pr = to_real(p), qr = to_real(q), pq = pr * qr, lpq = std::log(pq);
  long double log_Q = seeds.log_Q1, log_Qt = seeds.log_Qt1;
  for (int j = 1; j <= j_max; ++j) {
    out.terms.push_back(t);
    out.log_Q.push_back(log_Q);
    out.log_Qt.push_back(log_Qt);
    const long double st = to_real(t.sigma_t), s = to_real(t.sigma);
    const long double next_Q = seeds.log_C0 + seeds.log_C3 - j * lpq + pr * log_Qt - std::log(st * pr + 1) -
                               std::log(st * pr + 2);
    const long double next_Qt = seeds.log_Ct0 + seeds.log_Ct3 - j * lpq + qr * log_Q - std::log(s * qr + 1) -
                                std::log(s * qr + 2);
    Case2Tuple<S> nx{nn * (p - 1) + t.theta_t * p, nn * (q - 1) + t.theta * q, t.sigma_t * p + 2, t.sigma * q + 2};
    t = nx;
    log_Q = next_Q;
    log_Qt = next_Qt;
  }
  if (pq > 1) {
    const auto sl = slicing_sequence<long double>(pq, j_max);
    out.ell = sl.ell;
    out.L = sl.L;
    out.L_limit = sl.L_estimate;
  }
  const long double d = pq - 1;
  for (int j = 1; j <= j_max; ++j) {
    if (j % 2 == 0) {
      out.log_Q_bound.push_back(std::numeric_limits<long double>::quiet_NaN());
      out.log_Qt_bound.push_back(std::numeric_limits<long double>::quiet_NaN());
      continue;
    }
    const long double grow = std::pow(pq, (j - 1) / 2.0L);
    const long double tail = (2 * pq + j * d) * lpq / (d * d);
    out.log_Q_bound.push_back(grow * (seeds.log_Q1 - 2 * (pr + 1) * (3 * pq - 1) * lpq / (d * d) + seeds.log_E2 / d) +
                              2 * (pr + 1) * tail - seeds.log_E2 / d);
    out.log_Qt_bound.push_back(grow * (seeds.log_Qt1 - 2 * (qr + 1) * (3 * pq - 1) * lpq / (d * d) + seeds.log_Et2 / d) +
                               2 * (qr + 1) * tail - seeds.log_Et2 / d);
  }
  return out;
}

/// sigma_j, sigma~_j in closed form for any j.
template <class S>
std::pair<S, S> case2_closed_sigma(const S& p, const S& q, int n, int j) {
  if (j < 1) throw DomainError("case2_closed_sigma: j must be >= 1");
  const S pq = p * q, d = pq - 1, nn = S(n);
  if (j % 2 == 1) {
    const S g = pow_int(pq, (j - 1) / 2);
    return {((nn + 1) * d + 2 * (p + 1)) / d * g - 2 * (p + 1) / d,
            ((nn + 1) * d + 2 * (q + 1)) / d * g - 2 * (q + 1) / d};
  }
  const S g = pow_int(pq, j / 2);
  return {((nn + 1) * d + 2 * (q + 1)) / (d * q) * g - 2 * (p + 1) / d,
          ((nn + 1) * d + 2 * (p + 1)) / (d * p) * g - 2 * (q + 1) / d};
}

/// Even-j sigma~ with 2(q + 1) in the leading coefficient instead of 2(p + 1);
/// it disagrees with the recursion unless p == q.
template <class S>
S sigma_tilde_even_swapped(const S& p, const S& q, int n, int j) {
  const S pq = p * q, d = pq - 1, nn = S(n);
  return ((nn + 1) * d + 2 * (q + 1)) / (d * p) * pow_int(pq, j / 2) - 2 * (q + 1) / d;
}

template <class S>
Case2Tuple<S> case2_closed_form(const S& p, const S& q, int n, int j) {
  if (j < 1) throw DomainError("case2_closed_form: j must be >= 1");
  if (j % 2 == 0) throw UnsupportedError("case2_closed_form: theta closed forms exist for odd j only");
  const S pq = p * q, nn = S(n);
  const S g = pow_int(pq, (j - 1) / 2);
  Case2Tuple<S> t;
  t.theta = (2 * nn + (nn - 1) * p) / 2 * g - nn;
  t.theta_t = (2 * nn + (nn - 1) * q) / 2 * g - nn;
  auto [s, st] = case2_closed_sigma(p, q, n, j);
  t.sigma = s;
  t.sigma_t = st;
  return t;
}

namespace detail {

template <class S>
long double rel_dev(const S& a, const S& b) {
  const long double x = to_real(a), y = to_real(b);
  const long double scale = std::max<long double>(1, std::max(std::abs(x), std::abs(y)));
  return std::abs(x - y) / scale;
}

}  // namespace detail

/// Largest relative deviation between recursion and every closed form available at j.
template <class S>
long double case1_agreement(const Case1Sequences<S>& s, int j) {
  const auto& r = s.terms[static_cast<std::size_t>(j - 1)];
  long double dev = 0;
  if (j % 2 == 1) {
    const auto c = case1_closed_form(s.p, s.q, s.n, j);
    for (auto [x, y] : {std::pair{r.a, c.a}, {r.a_t, c.a_t}, {r.alpha, c.alpha}, {r.alpha_t, c.alpha_t},
                        {r.b, c.b}, {r.b_t, c.b_t}, {r.beta, c.beta}, {r.beta_t, c.beta_t}})
      dev = std::max(dev, detail::rel_dev(x, y));
  } else {
    const auto [b, bt] = case1_closed_beta(s.p, s.q, s.n, j);
    dev = std::max(detail::rel_dev(r.beta, b), detail::rel_dev(r.beta_t, bt));
  }
  return dev;
}

template <class S>
long double case2_agreement(const Case2Sequences<S>& s, int j) {
  const auto& r = s.terms[static_cast<std::size_t>(j - 1)];
  long double dev = 0;
  if (j % 2 == 1) {
    const auto c = case2_closed_form(s.p, s.q, s.n, j);
    for (auto [x, y] : {std::pair{r.theta, c.theta}, {r.theta_t, c.theta_t}, {r.sigma, c.sigma}, {r.sigma_t, c.sigma_t}})
      dev = std::max(dev, detail::rel_dev(x, y));
  } else {
    const auto [sg, sgt] = case2_closed_sigma(s.p, s.q, s.n, j);
    dev = std::max(detail::rel_dev(r.sigma, sg), detail::rel_dev(r.sigma_t, sgt));
  }
  return dev;
}

/// Non-constructive constants as logs (0 = placeholder value 1).
struct ThresholdPlaceholders {
  double log_E0 = 0, log_Et0 = 0, log_E2 = 0, log_Et2 = 0;
};

struct IndexThresholds {
  int j0, j1, j1_t, j2, jm;
};

inline int ceil_at_least_one(double x) { return std::max(1, static_cast<int>(std::ceil(x))); }

/// j1 (or j~1) from g(0) and g'(0).
inline int slicing_start_index(double pq, double t0, double L, const MemoryKernel& g) {
  const auto jet = g.jet_at_zero();
  if (jet.g1 > 0.0) return 1;
  const double arg = 1.0 / jet.g0 - jet.g1 * L * t0 / (2.0 * jet.g0);
  return ceil_at_least_one(2.0 * std::log(arg) / std::log(pq));
}

inline IndexThresholds index_thresholds(double p, double q, double t0, double L, const MemoryKernel& g1,
                                        const MemoryKernel& g2, const ThresholdPlaceholders& ph = {}) {
  const double pq = p * q;
  if (!(pq > 1.0)) throw DomainError("index_thresholds: pq must exceed 1");
  const double lpq = std::log(pq);
  IndexThresholds th{};
  th.j0 = ceil_at_least_one(2.0 / (3.0 * lpq) * std::max(ph.log_E0 / (p + 1), ph.log_Et0 / (q + 1)) -
                            2.0 * pq / (pq - 1.0));
  th.j1 = slicing_start_index(pq, t0, L, g1);
  th.j1_t = slicing_start_index(pq, t0, L, g2);
  th.j2 = ceil_at_least_one(1.0 / (2.0 * lpq) * std::max(ph.log_E2 / (p + 1), ph.log_Et2 / (q + 1)) -
                            2.0 * pq / (pq - 1.0));
  int jm = 1;
  while (L * t0 * std::pow(pq, -jm / 2.0) >= 0.1) ++jm;
  th.jm = jm;
  return th;
}

enum class IterationCase { Case1, Case2 };

struct CertificateSeeds {
  double log_U = 0;  // log E1 (Case 1) or log Q1 (Case 2)
  double log_V = 0;  // log E~1 or log Q~1
};

struct DivergenceReport {
  double t_exponent_u = 0;   // power of t in the U base
  double t_exponent_v = 0;
  double t_exponent = 0;     // max of the two
  /// d log B / d log t at the end of the grid, kernel factors included
  double effective_exponent = 0;
  std::optional<double> first_time;
  std::string component;     // "U" or "V" for the first base exceeding 1
};

namespace detail {

// log of the bracketed base for U (first) and V (second)
inline std::pair<double, double> log_bases(IterationCase c, double p, double q, int n, const MemoryKernel* g1,
                                           const MemoryKernel* g2, const CertificateSeeds& seeds, double t) {
  const double pq = p * q, d = pq - 1.0, lt = std::log(t), l2 = std::log(2.0), nd = n;
  if (c == IterationCase::Case1) {
    const double lg1 = std::log(g1->value(t)), lg2 = std::log(g2->value(t));
    const double eu = -(nd - 1) * p / 2 + 2 + 3 * (p + 1) / d;
    const double ev = -(nd - 1) * q / 2 + 2 + 3 * (q + 1) / d;
    return {seeds.log_U - ((nd - 1) * p / 2 + nd) * l2 + pq / d * lg1 + p / d * lg2 + eu * lt,
            seeds.log_V - ((nd - 1) * q / 2 + nd) * l2 + q / d * lg1 + pq / d * lg2 + ev * lt};
  }
  const double eu = -(nd - 1) * p / 2 + 1 + 2 * (p + 1) / d;
  const double ev = -(nd - 1) * q / 2 + 1 + 2 * (q + 1) / d;
  return {seeds.log_U - ((2 * nd + (nd - 1) * p) / 2 + ((nd + 1) * d + 2 * (p + 1)) / d) * l2 + eu * lt,
          seeds.log_V - ((2 * nd + (nd - 1) * q) / 2 + ((nd + 1) * d + 2 * (q + 1)) / d) * l2 + ev * lt};
}

}  // namespace detail

/// First time on `times` where the base of the iterated lower bound exceeds 1, so the
/// bound diverges as j -> infinity. Constants are normalized by `seeds` (default 1).
inline DivergenceReport divergence_certificate(IterationCase c, double p, double q, int n, const MemoryKernel& g1,
                                               const MemoryKernel& g2, const CertificateSeeds& seeds,
                                               const std::vector<double>& times) {
  if (times.size() < 2) throw ConfigError("divergence_certificate: need at least two times");
  const Decay want = c == IterationCase::Case1 ? Decay::Slow : Decay::Fast;
  if (classify_decay(g1).tag != want || classify_decay(g2).tag != want)
    throw BranchMismatchError("divergence_certificate: kernel class does not match the iteration case");
  const double pq = p * q, d = pq - 1.0, nd = n;
  if (!(d > 0.0)) throw DomainError("divergence_certificate: pq must exceed 1");
  DivergenceReport r;
  if (c == IterationCase::Case1) {
    r.t_exponent_u = -(nd - 1) * p / 2 + 2 + 3 * (p + 1) / d;
    r.t_exponent_v = -(nd - 1) * q / 2 + 2 + 3 * (q + 1) / d;
  } else {
    r.t_exponent_u = -(nd - 1) * p / 2 + 1 + 2 * (p + 1) / d;
    r.t_exponent_v = -(nd - 1) * q / 2 + 1 + 2 * (q + 1) / d;
  }
  r.t_exponent = std::max(r.t_exponent_u, r.t_exponent_v);
  std::optional<MemoryKernel> m1, m2;
  if (c == IterationCase::Case1) {
    m1 = minorant(g1);
    m2 = minorant(g2);
  }
  const MemoryKernel* k1 = m1 ? &*m1 : &g1;
  const MemoryKernel* k2 = m2 ? &*m2 : &g2;
  for (double t : times) {
    const auto [bu, bv] = detail::log_bases(c, p, q, n, k1, k2, seeds, t);
    if (bu > 0.0 || bv > 0.0) {
      r.first_time = t;
      r.component = bu > 0.0 ? "U" : "V";
      break;
    }
  }
  const double ta = times[times.size() - 2], tb = times.back();
  const auto [ua, va] = detail::log_bases(c, p, q, n, k1, k2, seeds, ta);
  const auto [ub, vb] = detail::log_bases(c, p, q, n, k1, k2, seeds, tb);
  r.effective_exponent = std::max(ub - ua, vb - va) / (std::log(tb) - std::log(ta));
  return r;
}

inline DivergenceReport divergence_certificate(IterationCase c, double p, double q, int n, const MemoryKernel& g1,
                                               const MemoryKernel& g2, const CertificateSeeds& seeds = {}) {
  return divergence_certificate(c, p, q, n, g1, g2, seeds, log_grid(1.0, 1e8, 161));
}

}  // namespace memwave
