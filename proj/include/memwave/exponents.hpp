#pragma once

// Critical exponents, critical curves, the log-iterate function and the blow-up
// conditions for slow/fast memory kernels.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "memwave/error.hpp"
#include "memwave/kernels.hpp"

namespace memwave {

struct ProblemParams {
  int n = 1;
  double p = 2.0;
  double q = 2.0;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  int r_depth = 0;

  void validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(p > 1.0) || !(q > 1.0)) throw ConfigError("p and q must exceed 1");
    if (r_depth < 0 || r_depth > 4) throw ConfigError("r_depth must lie in [0, 4]");
  }
  /// p or q above the Sobolev bound n/(n-2) (n >= 3); flagged, not fatal.
  bool sobolev_violation() const {
    if (n < 3) return false;
    const double bound = static_cast<double>(n) / (n - 2);
    return p > bound || q > bound;
  }
};

enum class Branch { SlowSlow, FastFast, Unsupported };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::SlowSlow: return "SlowSlow";
    case Branch::FastFast: return "FastFast";
    case Branch::Unsupported: return "Unsupported";
  }
  return "?";
}

struct ConditionVerdict {
  bool satisfied = false;
  Branch branch = Branch::Unsupported;
  std::vector<double> witness_times;
  /// log-scale slack at the largest tested time (SlowSlow) or alpha - (n-1)/2 (FastFast)
  double margin = 0.0;
  /// alpha_W == (n-1)/2 to rounding: the open critical case, reported as not satisfied
  bool critical = false;
  bool sobolev_warning = false;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Positive root of (n-1)p^2 - (n+1)p - 2 = 0; +inf for n = 1.
inline double strauss_exponent(int n) {
  if (n <= 0) throw DomainError("strauss_exponent: n must be >= 1");
  if (n == 1) return kInfinity;
  const double nd = n;
  return (nd + 1.0 + std::sqrt(nd * nd + 10.0 * nd - 7.0)) / (2.0 * (nd - 1.0));
}

/// Positive root of (n-1)p^2 - (n+3-2 gamma)p - 2 = 0; +inf for n = 1.
inline double generalized_strauss(int n, double gamma) {
  if (n <= 0) throw DomainError("generalized_strauss: n must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("generalized_strauss: gamma must lie in (0, 1)");
  if (n == 1) return kInfinity;
  const double nd = n;
  const double b = nd + 3.0 - 2.0 * gamma;
  return (b + std::sqrt(b * b + 8.0 * (nd - 1.0))) / (2.0 * (nd - 1.0));
}

inline double alpha_w(double p, double q) {
  const double d = p * q - 1.0;
  return std::max((p + 2.0 + 1.0 / q) / d, (q + 2.0 + 1.0 / p) / d);
}

/// Memory-modified critical curve; gamma = 1 is admitted as the formula boundary.
inline double alpha_wm(double p, double q, double gamma1, double gamma2) {
  const double d = p * q - 1.0;
  return std::max(((2.0 - gamma2) * p + (3.0 - gamma1) + 1.0 / q) / d,
                  ((2.0 - gamma1) * q + (3.0 - gamma2) + 1.0 / p) / d);
}

namespace detail {

// ln of the r-fold exponential tower started at 1 equals the (r-1)-fold tower
inline double exp_tower(int r) {
  double x = 1.0;
  for (int i = 0; i < r; ++i) x = std::exp(x);
  return x;
}

}  // namespace detail

/// ln(log_iterate(t, r)), evaluated in log space so that deep towers do not lose the t-dependence.
inline double log_of_log_iterate(double t, int r) {
  if (r < 0) throw DomainError("log_iterate: r must be >= 0");
  if (r > 4) throw UnsupportedError("log_iterate: r > 4 overflows the exponential tower");
  if (t < 0.0) throw DomainError("log_iterate: t must be >= 0");
  if (t == 0.0) return -kInfinity;
  // d_0 = t, d_k = log1p(d_{k-1} / T_{r-k+1}), result log1p(d_r); ln T_m = T_{m-1}
  double log_d = std::log(t);
  for (int k = 1; k <= r + 1; ++k) {
    const int m = r - k + 1;
    const double log_tower = m == 0 ? 0.0 : detail::exp_tower(m - 1);
    const double log_x = log_d - log_tower;
    if (log_x < -30.0) {
      log_d = log_x;
    } else {
      const double softplus = log_x > 30.0 ? log_x + std::log1p(std::exp(-log_x)) : std::log1p(std::exp(log_x));
      log_d = std::log(softplus);
    }
  }
  return log_d;
}

/// ln^{(r+1)}(exp^{(r)}(1) + t): zero at t = 0, increasing and unbounded.
inline double log_iterate(double t, int r) {
  if (t == 0.0) {
    if (r < 0) throw DomainError("log_iterate: r must be >= 0");
    if (r > 4) throw UnsupportedError("log_iterate: r > 4 overflows the exponential tower");
    return 0.0;
  }
  return std::exp(log_of_log_iterate(t, r));
}

/// Log-spaced times on [t_lo, t_hi] with `count` points.
inline std::vector<double> log_grid(double t_lo, double t_hi, int count) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || count < 2) throw ConfigError("log_grid: bad range");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log(t_lo), b = std::log(t_hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  out.back() = t_hi;
  return out;
}

constexpr double kSlowMarginTolerance = 0.5;

/// log LHS - log RHS of the slow-kernel condition at time t, using the kernels as given.
inline double slow_condition_log_gap(const ProblemParams& pr, const MemoryKernel& g1, const MemoryKernel& g2,
                                     double t) {
  const double lg1 = std::log(g1.value(t));
  const double lg2 = std::log(g2.value(t));
  const double lt = std::log(t);
  const double p = pr.p, q = pr.q;
  const double lhs = lg1 + lg2 + std::max((q - 1.0) * lg1 + (2.0 * q + 1.0 / p) * lt,
                                          (p - 1.0) * lg2 + (2.0 * p + 1.0 / q) * lt);
  const double rhs = ((pr.n - 1) * (p * q - 1.0) / 2.0 - 3.0) * lt + log_of_log_iterate(t, pr.r_depth);
  return lhs - rhs;
}

/// Slow-kernel blow-up condition on a finite time grid; kernels are replaced by their
/// non-increasing minorants first.
inline ConditionVerdict check_condition_slow(const ProblemParams& pr, const MemoryKernel& g1,
                                             const MemoryKernel& g2, const std::vector<double>& times) {
  pr.validate();
  if (classify_decay(g1).tag != Decay::Slow || classify_decay(g2).tag != Decay::Slow)
    throw BranchMismatchError("check_condition_slow: both kernels must be Slow-class");
  if (times.empty()) throw ConfigError("check_condition_slow: empty time list");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
      throw ConfigError("check_condition_slow: times must be positive and increasing");
  }
  const MemoryKernel m1 = minorant(g1);
  const MemoryKernel m2 = minorant(g2);
  ConditionVerdict v;
  v.branch = Branch::SlowSlow;
  v.sobolev_warning = pr.sobolev_violation();
  double worst_tail = kInfinity;
  const std::size_t half = times.size() / 2;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double gap = slow_condition_log_gap(pr, m1, m2, times[i]);
    if (gap >= -kSlowMarginTolerance) v.witness_times.push_back(times[i]);
    if (i >= half) worst_tail = std::min(worst_tail, gap);
    if (i + 1 == times.size()) v.margin = gap;
  }
  v.satisfied = worst_tail >= -kSlowMarginTolerance;
  return v;
}

inline ConditionVerdict check_condition_slow(const ProblemParams& pr, const MemoryKernel& g1,
                                             const MemoryKernel& g2) {
  return check_condition_slow(pr, g1, g2, log_grid(1.0, 1e6, 61));
}

/// Fast-kernel condition alpha_W(p, q) > (n-1)/2 (strict; equality is flagged critical).
inline ConditionVerdict check_condition_fast(const ProblemParams& pr) {
  pr.validate();
  ConditionVerdict v;
  v.branch = Branch::FastFast;
  v.sobolev_warning = pr.sobolev_violation();
  const double aw = alpha_w(pr.p, pr.q);
  const double threshold = (pr.n - 1) / 2.0;
  v.margin = aw - threshold;
  v.critical = std::abs(v.margin) <= 1e-12 * std::max(1.0, threshold);
  v.satisfied = !v.critical && v.margin > 0.0;
  return v;
}

/// Dispatch on the decay classes of the two kernels; mixed pairs are Unsupported.
inline ConditionVerdict check_condition(const ProblemParams& pr, const MemoryKernel& g1, const MemoryKernel& g2) {
  const Decay d1 = classify_decay(g1).tag, d2 = classify_decay(g2).tag;
  if (d1 == Decay::Slow && d2 == Decay::Slow) return check_condition_slow(pr, g1, g2);
  if (d1 == Decay::Fast && d2 == Decay::Fast) return check_condition_fast(pr);
  ConditionVerdict v;
  v.branch = Branch::Unsupported;
  v.sobolev_warning = pr.sobolev_violation();
  return v;
}

namespace experimental {

/// Log gaps of the two conjectured mixed slow/fast conditions (g1 fast & g2 slow, g2 fast & g1 slow).
/// Raw expression evaluators only; never used for verdicts.
struct MixedGaps {
  double g1_fast;
  double g2_fast;
};

inline MixedGaps mixed_condition_log_gaps(const ProblemParams& pr, const MemoryKernel& g1,
                                          const MemoryKernel& g2, double t) {
  const double p = pr.p, q = pr.q, lt = std::log(t);
  const double rhs = ((pr.n - 1) * (p * q - 1.0) / 2.0 - 2.0) * lt + log_of_log_iterate(t, pr.r_depth);
  const double lg1 = std::log(g1.value(t)), lg2 = std::log(g2.value(t));
  const double a = lg2 + std::max((1.0 - q + 2.0 * q + 1.0 / p) * lt, (p - 1.0) * lg2 + (2.0 * p + 1.0 / q) * lt);
  const double b = lg1 + std::max((q - 1.0) * lg1 + (2.0 * q + 1.0 / p) * lt, (1.0 - p + 2.0 * p + 1.0 / q) * lt);
  return {a - rhs, b - rhs};
}

}  // namespace experimental

struct Range {
  double lo;
  double hi;
};

struct RegionCell {
  double p;
  double q;
  Branch branch;
  bool satisfied;
  double margin;
};

struct RegionMap {
  int p_resolution = 0;
  int q_resolution = 0;
  std::vector<RegionCell> cells;  // row-major: q index outer, p index inner

  const RegionCell& at(int ip, int iq) const {
    return cells[static_cast<std::size_t>(iq) * static_cast<std::size_t>(p_resolution) + static_cast<std::size_t>(ip)];
  }
};

/// What decides each sweep cell.
struct SweepKernels {
  enum class Kind { FastFast, RiemannLiouvillePair, General } kind = Kind::FastFast;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  std::optional<MemoryKernel> g1;
  std::optional<MemoryKernel> g2;

  static SweepKernels fast() { return {}; }
  static SweepKernels riemann_liouville(double g1, double g2) {
    SweepKernels s;
    s.kind = Kind::RiemannLiouvillePair;
    s.gamma1 = g1;
    s.gamma2 = g2;
    return s;
  }
  static SweepKernels general(MemoryKernel a, MemoryKernel b) {
    SweepKernels s;
    s.kind = Kind::General;
    s.g1 = std::move(a);
    s.g2 = std::move(b);
    return s;
  }
};

inline double sweep_node(const Range& r, int i, int res) {
  if (res == 1) return r.lo;
  return r.lo + (r.hi - r.lo) * static_cast<double>(i) / (res - 1);
}

inline RegionCell evaluate_cell(int n, const SweepKernels& k, double p, double q, int r_depth) {
  ProblemParams pr;
  pr.n = n;
  pr.p = p;
  pr.q = q;
  pr.r_depth = r_depth;
  RegionCell c{p, q, Branch::Unsupported, false, 0.0};
  switch (k.kind) {
    case SweepKernels::Kind::FastFast: {
      const auto v = check_condition_fast(pr);
      c.branch = v.branch;
      c.satisfied = v.satisfied;
      c.margin = v.margin;
      break;
    }
    case SweepKernels::Kind::RiemannLiouvillePair: {
      c.branch = Branch::SlowSlow;
      c.margin = alpha_wm(p, q, k.gamma1, k.gamma2) - (n - 1) / 2.0;
      c.satisfied = c.margin > 0.0;
      break;
    }
    case SweepKernels::Kind::General: {
      const auto v = check_condition(pr, *k.g1, *k.g2);
      c.branch = v.branch;
      c.satisfied = v.satisfied;
      c.margin = v.margin;
      break;
    }
  }
  return c;
}

/// Grid of verdicts over p_range x q_range; rows are distributed over `parallelism`
/// workers and collected in grid order.
inline RegionMap sweep_region(int n, const SweepKernels& kernels, Range p_range, Range q_range, int p_resolution,
                              int q_resolution, int parallelism = 1, int r_depth = 0) {
  if (n < 1) throw ConfigError("sweep: n must be >= 1");
  if (p_resolution < 1 || q_resolution < 1) throw ConfigError("sweep: resolution must be >= 1");
  for (const Range* r : {&p_range, &q_range}) {
    if (!(r->hi >= r->lo) || !std::isfinite(r->lo) || !std::isfinite(r->hi))
      throw ConfigError("sweep: empty range");
    if (!(r->lo > 1.0)) throw ConfigError("sweep: exponents must exceed 1");
    if (n >= 3 && r->hi > static_cast<double>(n) / (n - 2) + 1e-12)
      throw ConfigError("sweep: range exceeds the Sobolev bound n/(n-2)");
  }
  if ((p_resolution > 1 && p_range.hi == p_range.lo) || (q_resolution > 1 && q_range.hi == q_range.lo))
    throw ConfigError("sweep: empty range");
  RegionMap map;
  map.p_resolution = p_resolution;
  map.q_resolution = q_resolution;
  map.cells.resize(static_cast<std::size_t>(p_resolution) * static_cast<std::size_t>(q_resolution));
  auto do_row = [&](int iq) {
    const double q = sweep_node(q_range, iq, q_resolution);
    for (int ip = 0; ip < p_resolution; ++ip) {
      const double p = sweep_node(p_range, ip, p_resolution);
      map.cells[static_cast<std::size_t>(iq) * static_cast<std::size_t>(p_resolution) + static_cast<std::size_t>(ip)] =
          evaluate_cell(n, kernels, p, q, r_depth);
    }
  };
  const int workers = std::max(1, std::min(parallelism, q_resolution));
  if (workers == 1) {
    for (int iq = 0; iq < q_resolution; ++iq) do_row(iq);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int iq = w; iq < q_resolution; iq += workers) do_row(iq);
      });
    }
    for (auto& th : pool) th.join();
  }
  return map;
}

}  // namespace memwave
