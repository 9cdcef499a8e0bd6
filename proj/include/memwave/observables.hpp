#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "memwave/error.hpp"
#include "memwave/history.hpp"
#include "memwave/solver.hpp"

namespace memwave {

/// Surface measure of the unit sphere in R^n (n = 1: the two points +-1).
inline double sphere_measure(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw UnsupportedError("sphere_measure: n must lie in {1, 2, 3}");
  }
}

/// Radial profile of the positive solution of Lap Phi = Phi.
inline double phi_eigenfunction(int n, double r) {
  if (r < 0.0) throw DomainError("phi_eigenfunction: r must be >= 0");
  switch (n) {
    case 1: return std::exp(r) + std::exp(-r);
    case 2: {
      // I_0(r) = sum (r^2/4)^k / (k!)^2
      const double x = 0.25 * r * r;
      double term = 1.0, sum = 1.0;
      for (int k = 1; k < 1000; ++k) {
        term *= x / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-12 * sum * 1e-5) break;
      }
      return 2.0 * std::numbers::pi * sum;
    }
    case 3: {
      const double s = r < 1e-4 ? 1.0 + r * r / 6.0 + r * r * r * r / 120.0 : std::sinh(r) / r;
      return 4.0 * std::numbers::pi * s;
    }
    default: throw UnsupportedError("phi_eigenfunction: n must lie in {1, 2, 3}");
  }
}

/// Trapezoid weights for int_{R^n} f = omega int_0^inf f(r) r^{n-1} dr on r_i = i dr, i = 0..M.
inline std::vector<double> radial_weights(int n, double dr, std::size_t M) {
  const double om = sphere_measure(n);
  std::vector<double> w(M + 1);
  for (std::size_t i = 0; i <= M; ++i) {
    const double r = static_cast<double>(i) * dr;
    w[i] = om * std::pow(r, n - 1) * dr * ((i == 0 || i == M) ? 0.5 : 1.0);
  }
  return w;
}

struct TraceRow {
  double t = 0, U = 0, V = 0, U0 = 0, V0 = 0, Lp_v = 0, Lq_u = 0, maxnorm_u = 0, maxnorm_v = 0;
};

/// Per-step functionals. In Single and MGT mode the v columns are zero and Lp_v holds the
/// integral of |u|^p, the nonlinearity feeding U''.
struct FunctionalTrace {
  double dt = 0.0;
  std::vector<TraceRow> rows;
};

inline TraceRow compute_functionals(const WaveState& s, const SystemConfig& cfg) {
  const std::size_t M = s.u.size() - 1;
  const std::vector<double> W = radial_weights(s.n, s.dr, M);
  const double decay = std::exp(-s.t);
  TraceRow row;
  row.t = s.t;
  const bool coupled = cfg.mode == Mode::Coupled;
  const double p = cfg.params.p, q = cfg.params.q;
  for (std::size_t i = 0; i <= M; ++i) {
    const double phi = phi_eigenfunction(s.n, s.r[i]);
    const double au = std::abs(s.u[i]), av = std::abs(s.v[i]);
    row.U += W[i] * s.u[i];
    row.V += W[i] * s.v[i];
    row.U0 += W[i] * s.u[i] * phi;
    row.V0 += W[i] * s.v[i] * phi;
    if (coupled)
      row.Lp_v += W[i] * (av == 0.0 ? 0.0 : std::pow(av, p));
    else
      row.Lp_v += W[i] * (au == 0.0 ? 0.0 : std::pow(au, p));
    row.Lq_u += W[i] * (au == 0.0 ? 0.0 : std::pow(au, q));
    row.maxnorm_u = std::max(row.maxnorm_u, au);
    row.maxnorm_v = std::max(row.maxnorm_v, av);
  }
  row.U0 *= decay;
  row.V0 *= decay;
  return row;
}

enum class Trigger { MaxNorm, NonFinite, ReachedTmax };

inline const char* to_string(Trigger t) {
  switch (t) {
    case Trigger::MaxNorm: return "MaxNorm";
    case Trigger::NonFinite: return "NonFinite";
    case Trigger::ReachedTmax: return "ReachedTmax";
  }
  return "?";
}

struct Snapshot {
  double t = 0.0;
  std::vector<double> u, v;
};

struct SimulationResult {
  FunctionalTrace trace;
  Trigger trigger = Trigger::ReachedTmax;
  double t_stop = 0.0;
  double max_halo_leak = 0.0;
  double dr = 0.0;
  int n = 1;
  std::vector<Snapshot> snapshots;
  WaveState final_state;
};

/// Time-steps until t_max or a blow-up signal, recording functionals every `record_every` steps.
inline SimulationResult run_simulation(const SystemConfig& cfg) {
  const Solver solver(cfg);
  WaveState s = solver.initial_state();
  SimulationResult res;
  res.dr = cfg.grid.dr;
  res.n = cfg.params.n;
  res.trace.dt = s.dt * cfg.record_every;
  res.trace.rows.push_back(compute_functionals(s, cfg));
  std::vector<double> pending = cfg.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_snap = 0;
  auto snap = [&]() {
    while (next_snap < pending.size() && s.t >= pending[next_snap] - 0.5 * s.dt) {
      res.snapshots.push_back({s.t, s.u, s.v});
      ++next_snap;
    }
  };
  snap();
  const std::size_t steps = cfg.step_count();
  for (std::size_t k = 0; k < steps; ++k) {
    const StepSignal sig = solver.step(s);
    if (sig == StepSignal::NonFinite) {
      res.trigger = Trigger::NonFinite;
      break;
    }
    if (s.step % static_cast<std::size_t>(cfg.record_every) == 0) res.trace.rows.push_back(compute_functionals(s, cfg));
    snap();
    if (sig == StepSignal::MaxNorm) {
      res.trigger = Trigger::MaxNorm;
      break;
    }
  }
  res.t_stop = s.t;
  res.max_halo_leak = s.max_halo_leak;
  res.final_state = std::move(s);
  return res;
}

/// Largest relative residual of U'' = g1 * Lp_v over the middle 80% of the samples inside
/// [t_lo, t_hi] (whole trace by default).
inline double check_u_doubleprime_identity(const FunctionalTrace& trace, const MemoryKernel& g1,
                                           double t_lo = -INFINITY, double t_hi = INFINITY) {
  const std::size_t N = trace.rows.size();
  if (N < 16) throw InsufficientDataError("check_u_doubleprime_identity: need at least 16 samples");
  const double dt = trace.dt;
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k + 1 < N; ++k)
    if (trace.rows[k].t >= t_lo - 1e-12 && trace.rows[k].t <= t_hi + 1e-12) idx.push_back(k);
  if (idx.size() < 10) throw InsufficientDataError("check_u_doubleprime_identity: window holds too few samples");
  const std::size_t cut = idx.size() / 10;
  std::vector<double> Lp(N);
  for (std::size_t k = 0; k < N; ++k) Lp[k] = trace.rows[k].Lp_v;
  const HistoryWeights w(g1, dt);
  std::vector<double> lhs, rhs;
  double scale = 0.0;
  for (std::size_t j = cut; j < idx.size() - cut; ++j) {
    const std::size_t k = idx[j];
    lhs.push_back((trace.rows[k + 1].U - 2.0 * trace.rows[k].U + trace.rows[k - 1].U) / (dt * dt));
    rhs.push_back(convolve_history(w, std::span<const double>(Lp).first(k + 1)));
    scale = std::max(scale, std::abs(rhs.back()));
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < lhs.size(); ++j) {
    const double d = std::abs(lhs[j] - rhs[j]);
    if (scale == 0.0)
      worst = std::max(worst, d);
    else
      worst = std::max(worst, d / std::max(std::abs(rhs[j]), 1e-6 * scale));
  }
  return worst;
}

struct BoundCheck {
  bool holds = true;
  double worst_margin = 0.0;  // min over checked times of (left - right)
  std::size_t checked = 0;
};

/// Phi-weighted data integrals int u0 Phi, int u1 Phi (and v) on the solver grid.
struct PhiMoments {
  double u0 = 0, u1 = 0, v0 = 0, v1 = 0;
};

inline PhiMoments phi_moments(const SystemConfig& cfg) {
  const std::size_t M = cfg.outer_index();
  const int n = cfg.params.n;
  const std::vector<double> W = radial_weights(n, cfg.grid.dr, M);
  PhiMoments m;
  for (std::size_t i = 0; i < M; ++i) {
    const double r = static_cast<double>(i) * cfg.grid.dr;
    const double wphi = W[i] * phi_eigenfunction(n, r);
    m.u0 += wphi * cfg.data.u0(r);
    m.u1 += wphi * cfg.data.u1(r);
    if (cfg.mode == Mode::Coupled) {
      m.v0 += wphi * cfg.data.v0(r);
      m.v1 += wphi * cfg.data.v1(r);
    }
  }
  return m;
}

/// Lower bound for U0 = int u Psi with nonnegative data:
/// (1 + e^{-2t})/2 int u0 Phi + (1 - e^{-2t})/2 int u1 Phi.
inline double u0_lower_bound(double t, double a0, double a1) {
  const double e = std::exp(-2.0 * t);
  return 0.5 * (1.0 + e) * a0 + 0.5 * (1.0 - e) * a1;
}

/// The same bound with the u0 / u1 coefficients interchanged; it fails already at t = 0
/// when u0 = 0 and u1 > 0.
inline double u0_lower_bound_swapped(double t, double a0, double a1) {
  const double e = std::exp(-2.0 * t);
  return 0.5 * (1.0 - e) * a0 + 0.5 * (1.0 + e) * a1;
}

inline BoundCheck check_u0_lower_bound(const FunctionalTrace& trace, const SystemConfig& cfg) {
  const PhiMoments m = phi_moments(cfg);
  BoundCheck out;
  bool first = true;
  for (const TraceRow& row : trace.rows) {
    auto one = [&](double lhs, double rhs) {
      const double margin = lhs - rhs;
      if (first || margin < out.worst_margin) out.worst_margin = margin;
      first = false;
      if (margin < -1e-3 * (std::abs(rhs) + 1.0)) out.holds = false;
    };
    one(row.U0, u0_lower_bound(row.t, m.u0, m.u1));
    if (cfg.mode == Mode::Coupled) one(row.V0, u0_lower_bound(row.t, m.v0, m.v1));
    ++out.checked;
  }
  return out;
}

/// First iteration-frame inequality U(t) >= C0 int_0^t int_0^eta int_0^s g1(s - tau)
/// (R + tau)^{-n(p-1)} V(tau)^p dtau ds deta with C0 = (omega / n)^{1-p}, checked over the final
/// quarter of the trace.
inline BoundCheck check_iteration_frame(const FunctionalTrace& trace, const SystemConfig& cfg) {
  if (cfg.mode != Mode::Coupled) throw ConfigError("check_iteration_frame: requires a coupled run");
  const std::size_t N = trace.rows.size();
  if (N < 8) throw InsufficientDataError("check_iteration_frame: need at least 8 samples");
  const int n = cfg.params.n;
  const double p = cfg.params.p, R = cfg.support_radius(), dt = trace.dt;
  const double C0 = std::pow(sphere_measure(n) / n, 1.0 - p);
  std::vector<double> f(N);
  for (std::size_t k = 0; k < N; ++k)
    f[k] = std::pow(R + trace.rows[k].t, -n * (p - 1.0)) * std::pow(std::abs(trace.rows[k].V), p);
  const HistoryWeights w(cfg.g1, dt);
  const std::vector<double> F = convolve_all(w, f);
  std::vector<double> I1(N, 0.0), I2(N, 0.0);
  for (std::size_t k = 1; k < N; ++k) {
    I1[k] = I1[k - 1] + 0.5 * dt * (F[k - 1] + F[k]);
    I2[k] = I2[k - 1] + 0.5 * dt * (I1[k - 1] + I1[k]);
  }
  BoundCheck out;
  bool first = true;
  for (std::size_t k = N - N / 4; k < N; ++k) {
    const double rhs = C0 * I2[k];
    const double margin = trace.rows[k].U - rhs;
    if (first || margin < out.worst_margin) out.worst_margin = margin;
    first = false;
    if (margin < -1e-9 * (1.0 + std::abs(rhs))) out.holds = false;
    ++out.checked;
  }
  return out;
}

enum class BlowupRate { MemoryOde, FirstOrder };

inline const char* to_string(BlowupRate r) { return r == BlowupRate::MemoryOde ? "memory_ode" : "first_order"; }

inline BlowupRate blowup_rate_from_string(const std::string& s) {
  if (s == "memory_ode") return BlowupRate::MemoryOde;
  if (s == "first_order") return BlowupRate::FirstOrder;
  throw ConfigError("unknown blow-up rate '" + s + "' (expected memory_ode, first_order)");
}

/// Exponent a in maxnorm ~ (T - t)^{-a} used by the extrapolation.
///
/// MemoryOde balances u'' against g * u^p with g ~ t^{-s} near 0, giving a = (3 - s)/(p - 1) for
/// one equation and a_u = ((3 - s1) + p (3 - s2))/(pq - 1) for the system. FirstOrder is 1/(p - 1).
inline double blowup_rate_exponent(const SystemConfig& cfg, BlowupRate rate) {
  const double p = cfg.params.p, q = cfg.params.q;
  if (rate == BlowupRate::FirstOrder) return 1.0 / (p - 1.0);
  const double s1 = cfg.mode == Mode::MGT ? 0.0 : cfg.g1.singularity_order();
  if (cfg.mode != Mode::Coupled) return (3.0 - s1) / (p - 1.0);
  const double s2 = cfg.g2.singularity_order();
  return ((3.0 - s1) + p * (3.0 - s2)) / (p * q - 1.0);
}

struct BlowupVerdict {
  bool blew_up = false;
  double t_stop = 0.0;
  std::optional<double> T_estimate;
  double ci_low = NAN, ci_high = NAN;
  double r_squared = NAN;
  double rate_exponent = NAN;
  std::size_t fit_samples = 0;
  Trigger trigger = Trigger::ReachedTmax;
};

/// Blow-up verdict. T_estimate is a heuristic: a least-squares line through
/// maxnorm_u^{-1/a} over the last decade of growth, extrapolated to zero, kept only when R^2 > 0.99.
inline BlowupVerdict detect_blowup(const SimulationResult& run, const SystemConfig& cfg,
                                   BlowupRate rate = BlowupRate::MemoryOde) {
  BlowupVerdict v;
  v.trigger = run.trigger;
  v.t_stop = run.t_stop;
  v.blew_up = run.trigger != Trigger::ReachedTmax;
  v.rate_exponent = blowup_rate_exponent(cfg, rate);
  if (!v.blew_up) return v;
  std::vector<double> ts, norms;
  for (const TraceRow& row : run.trace.rows) {
    if (!std::isfinite(row.maxnorm_u) || row.maxnorm_u <= 0.0) continue;
    norms.push_back(row.maxnorm_u);
    ts.push_back(row.t);
  }
  if (norms.size() < 5) return v;
  const double top = norms.back();
  // trailing monotone run of samples with maxnorm >= top / 10
  std::size_t start = norms.size() - 1;
  while (start > 0 && norms[start - 1] >= top / 10.0 && norms[start - 1] <= norms[start]) --start;
  const std::size_t m = norms.size() - start;
  v.fit_samples = m;
  if (m < 5) return v;
  std::vector<double> x(ts.begin() + static_cast<long>(start), ts.end()), y;
  for (std::size_t k = start; k < norms.size(); ++k) y.push_back(std::pow(norms[k], -1.0 / v.rate_exponent));
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return v;
  const double b = sxy / sxx, a = my - b * mx;
  double sse = 0;
  for (std::size_t k = 0; k < m; ++k) sse += std::pow(y[k] - (a + b * x[k]), 2);
  v.r_squared = 1.0 - sse / syy;
  if (!(b < 0.0) || !(v.r_squared > 0.99)) return v;
  const double T = -a / b;
  // delta-method interval from the regression covariance
  const double s2 = sse / static_cast<double>(m - 2);
  const double var_b = s2 / sxx;
  const double var_a = s2 * (1.0 / static_cast<double>(m) + mx * mx / sxx);
  const double cov_ab = -mx * s2 / sxx;
  const double ga = -1.0 / b, gb = a / (b * b);
  const double se = std::sqrt(std::max(0.0, ga * ga * var_a + gb * gb * var_b + 2.0 * ga * gb * cov_ab));
  v.T_estimate = T;
  v.ci_low = T - 1.96 * se;
  v.ci_high = T + 1.96 * se;
  return v;
}

/// Max relative error of the discrete radial Laplacian applied to Phi against Phi on [r_lo, r_hi].
inline double discrete_eigen_residual(int n, double dr, double r_lo, double r_hi) {
  const std::size_t M = static_cast<std::size_t>(std::ceil(r_hi / dr)) + 2;
  std::vector<double> phi(M + 1), lap;
  for (std::size_t i = 0; i <= M; ++i) phi[i] = phi_eigenfunction(n, static_cast<double>(i) * dr);
  radial_laplacian(n, dr, phi, lap);
  double worst = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double r = static_cast<double>(i) * dr;
    if (r < r_lo - 1e-12 || r > r_hi + 1e-12) continue;
    worst = std::max(worst, std::abs(lap[i] - phi[i]) / phi[i]);
  }
  return worst;
}

/// Leapfrog-conserved energy sum W (u_t^2 + u_r^k u_r^{k-1}) between the last two time levels.
inline double discrete_energy(const WaveState& s) {
  const std::size_t M = s.u.size() - 1;
  const std::vector<double> W = radial_weights(s.n, s.dr, M);
  double e = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double ut = (s.u[i] - s.u_prev[i]) / s.dt;
    e += W[i] * ut * ut;
  }
  const double om = sphere_measure(s.n);
  for (std::size_t i = 0; i < M; ++i) {
    const double rm = (static_cast<double>(i) + 0.5) * s.dr;
    const double g1 = (s.u[i + 1] - s.u[i]) / s.dr, g0 = (s.u_prev[i + 1] - s.u_prev[i]) / s.dr;
    e += om * std::pow(rm, s.n - 1) * s.dr * g1 * g0;
  }
  return e;
}

}  // namespace memwave
