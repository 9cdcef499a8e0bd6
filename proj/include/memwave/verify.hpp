#pragma once

// Invariant suite behind the `verify` subcommand.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "memwave/config.hpp"
#include "memwave/dalembert.hpp"
#include "memwave/exponents.hpp"
#include "memwave/history.hpp"
#include "memwave/iteration.hpp"
#include "memwave/observables.hpp"
#include "memwave/rational.hpp"

namespace memwave {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline CheckResult guarded(const std::string& name, const std::function<CheckResult()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace detail

inline std::vector<CheckResult> run_invariant_suite(const ResolvedConfig& rc) {
  std::vector<CheckResult> out;
  const SystemConfig& base = rc.system;
  using detail::num;

  out.push_back(detail::guarded("strauss_root", [] {
    double worst = 0;
    for (int n = 2; n <= 9; ++n) {
      const double p = strauss_exponent(n);
      worst = std::max(worst, std::abs((n - 1) * p * p - (n + 1) * p - 2));
    }
    return CheckResult{"strauss_root", worst < 1e-12, "max residual " + num(worst)};
  }));

  out.push_back(detail::guarded("closed_forms", [&] {
    const Rational p = rational_from_decimal(rc.sequences.p), q = rational_from_decimal(rc.sequences.q);
    const int n = rc.sequences.n;
    const auto s1 = case1_recursion(p, q, n, 25);
    const auto s2 = case2_recursion(p, q, n, 25);
    long double worst = 0;
    for (int j = 1; j <= 25; ++j) worst = std::max({worst, case1_agreement(s1, j), case2_agreement(s2, j)});
    return CheckResult{"closed_forms", worst == 0.0L, "max deviation " + num(static_cast<double>(worst))};
  }));

  out.push_back(detail::guarded("sum_formula", [] {
    bool ok = true;
    for (int pq : {2, 6, 10})
      for (int j = 3; j <= 21; j += 2) {
        Rational direct = 0, x = 1;
        for (int k = 0; k <= (j - 3) / 2; ++k, x *= pq) direct += Rational(j - 2 * k) * x;
        ok = ok && sum_formula(j, Rational(pq)) == direct;
      }
    return CheckResult{"sum_formula", ok, ok ? "exact for odd j <= 21" : "mismatch"};
  }));

  out.push_back(detail::guarded("slicing", [&] {
    const double pq = std::stod(rc.sequences.p) * std::stod(rc.sequences.q);
    const auto s = slicing_sequence<long double>(pq, 60);
    bool ok = true;
    for (std::size_t k = 1; k < s.L.size(); ++k) ok = ok && s.L[k] >= s.L[k - 1] && s.L[k] <= s.L_estimate;
    return CheckResult{"slicing", ok, "L_estimate " + num(static_cast<double>(s.L_estimate))};
  }));

  out.push_back(detail::guarded("history_row_sums", [&] {
    double worst = 0;
    for (const MemoryKernel* g : {&base.g1, &base.g2}) {
      const HistoryWeights w(*g, base.dt());
      for (std::size_t k = 1; k <= 1000; k += 111) {
        double sum = 0;
        for (double x : w.row(k)) sum += x;
        const double G = g->antiderivative(static_cast<double>(k) * base.dt());
        worst = std::max(worst, std::abs(sum - G) / G);
      }
    }
    return CheckResult{"history_row_sums", worst < 1e-10, "max relative error " + num(worst)};
  }));

  out.push_back(detail::guarded("eigen_identity", [] {
    double worst = 0;
    for (int n = 1; n <= 3; ++n) worst = std::max(worst, discrete_eigen_residual(n, 1e-3, 0.1, 5.0));
    return CheckResult{"eigen_identity", worst < 1e-3, "max relative error " + num(worst)};
  }));

  out.push_back(detail::guarded("conv_derivative_identity", [] {
    std::vector<double> t(2001), w(2001, 1.0);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = 1e-3 * static_cast<double>(k);
    const double r = conv_derivative_identity(MemoryKernel::exponential(1.0), w, t);
    return CheckResult{"conv_derivative_identity", r < 1e-4, "residual " + num(r)};
  }));

  out.push_back(detail::guarded("linear_order", [] {
    std::vector<double> errs;
    for (int level = 0; level < 3; ++level) {
      SystemConfig c;
      c.params.n = 1;
      c.mode = Mode::Single;
      c.forcing = false;
      c.grid = {1.0 / (50 << level), 0.8};
      c.t_max = 2.0;
      c.data.u0 = Profile::cosine_bump(1.0, 1.0);
      c.data.u1 = Profile::cosine_bump(0.5, 1.0);
      const auto run = run_simulation(c);
      const WaveState& s = run.final_state;
      double e = 0;
      for (std::size_t i = 0; i < s.u.size(); ++i)
        e = std::max(e, std::abs(s.u[i] - dalembert_reference(1, c.data.u0, c.data.u1, nullptr, s.t, s.r[i], 1e-4)));
      errs.push_back(e);
    }
    const double f1 = errs[0] / errs[1], f2 = errs[1] / errs[2];
    const bool ok = f1 >= 3.5 && f1 <= 4.5 && f2 >= 3.5 && f2 <= 4.5;
    return CheckResult{"linear_order", ok, "reduction factors " + num(f1) + ", " + num(f2)};
  }));

  // the configured scenario
  SimulationResult run;
  bool have_run = false;
  out.push_back(detail::guarded("scenario_runs", [&] {
    run = run_simulation(base);
    have_run = true;
    return CheckResult{"scenario_runs", true,
                       std::string("trigger ") + to_string(run.trigger) + " at t = " + num(run.t_stop) +
                           ", halo leak " + num(run.max_halo_leak)};
  }));
  if (!have_run) return out;

  const bool nonneg = [&] {
    for (const Profile* p : {&base.data.u0, &base.data.u1, &base.data.v0, &base.data.v1})
      if (p->amplitude < 0.0) return false;
    return true;
  }();
  if (nonneg) {
    out.push_back(detail::guarded("u0_lower_bound", [&] {
      const BoundCheck b = check_u0_lower_bound(run.trace, base);
      return CheckResult{"u0_lower_bound", b.holds, "worst margin " + num(b.worst_margin)};
    }));
    out.push_back(detail::guarded("forcing_nonnegative", [&] {
      bool ok = true;
      for (const TraceRow& r : run.trace.rows) ok = ok && r.Lp_v >= 0.0 && r.Lq_u >= 0.0;
      return CheckResult{"forcing_nonnegative", ok, ok ? "history profiles nonnegative" : "negative integral"};
    }));
    if (base.mode == Mode::Coupled && base.forcing)
      out.push_back(detail::guarded("iteration_frame", [&] {
        const BoundCheck b = check_iteration_frame(run.trace, base);
        return CheckResult{"iteration_frame", b.holds, "worst margin " + num(b.worst_margin)};
      }));
  }
  if (base.params.n == 1 && base.mode != Mode::MGT && base.forcing && run.trace.rows.size() >= 16)
    out.push_back(detail::guarded("u_doubleprime_identity", [&] {
      const double r = check_u_doubleprime_identity(run.trace, base.g1);
      return CheckResult{"u_doubleprime_identity", r < 0.05, "max relative residual " + num(r)};
    }));
  return out;
}

}  // namespace memwave
