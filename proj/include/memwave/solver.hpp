#pragma once

// Radial explicit solver for
//   u_tt - Lap u = g1 * |v|^p,  v_tt - Lap v = g2 * |u|^q      (Coupled)
//   u_tt - Lap u = g1 * |u|^p                                   (Single)
//   beta u_ttt + u_tt - Lap u - beta Lap u_t = beta |u|^p       (MGT)
// on r_i = i dr with the radial Laplacian u_rr + (n-1)/r u_r.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "memwave/error.hpp"
#include "memwave/exponents.hpp"
#include "memwave/history.hpp"
#include "memwave/kernels.hpp"
#include "memwave/profiles.hpp"

namespace memwave {

enum class Mode { Single, Coupled, MGT };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Single: return "single";
    case Mode::Coupled: return "coupled";
    case Mode::MGT: return "mgt";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "single") return Mode::Single;
  if (s == "coupled") return Mode::Coupled;
  if (s == "mgt") return Mode::MGT;
  throw ConfigError("unknown mode '" + s + "' (expected single, coupled, mgt)");
}

struct GridSpec {
  double dr = 0.01;
  double cfl = 0.9;
};

struct InitialData {
  Profile u0, u1, v0, v1;
};

struct SystemConfig {
  ProblemParams params;
  MemoryKernel g1 = MemoryKernel::constant(1.0);
  MemoryKernel g2 = MemoryKernel::constant(1.0);
  InitialData data;
  double t_max = 1.0;
  GridSpec grid;
  Mode mode = Mode::Coupled;
  bool forcing = true;
  bool truncate_tail = false;
  double blowup_threshold = 1e6;
  int record_every = 1;
  std::vector<double> snapshot_times;

  double dt() const { return grid.cfl * grid.dr; }

  /// Largest support radius among the nonzero initial profiles.
  double support_radius() const {
    double R = 0.0;
    for (const Profile* pr : {&data.u0, &data.u1, &data.v0, &data.v1})
      if (!pr->is_zero()) R = std::max(R, pr->radius);
    return R;
  }

  /// Number of time steps; the last one lands at or just past t_max.
  std::size_t step_count() const { return static_cast<std::size_t>(std::ceil(t_max / dt() - 1e-9)); }

  /// Index of the outer Dirichlet node, R / dr + steps + 2: one cell past the discrete domain
  /// of dependence.
  std::size_t outer_index() const {
    return static_cast<std::size_t>(std::ceil(support_radius() / grid.dr - 1e-9)) + step_count() + 2;
  }

  void validate() const {
    params.validate();
    if (params.n < 1 || params.n > 3) throw ConfigError("params.n: radial solver supports n in {1, 2, 3}");
    if (!(grid.dr > 0.0) || !std::isfinite(grid.dr)) throw ConfigError("grid.dr: must be > 0");
    if (!(grid.cfl > 0.0 && grid.cfl < 1.0)) throw ConfigError("grid.cfl: CFL number must lie in (0, 1)");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max: must be > 0");
    if (!(blowup_threshold > 0.0)) throw ConfigError("blowup_threshold: must be > 0");
    if (record_every < 1) throw ConfigError("record_every: must be >= 1");
    data.u0.validate("initial_data.u0");
    data.u1.validate("initial_data.u1");
    data.v0.validate("initial_data.v0");
    data.v1.validate("initial_data.v1");
    if (mode == Mode::MGT && g1.family() != KernelFamily::Exponential)
      throw ConfigError("kernels.g1: MGT mode requires an exponential kernel");
    if (truncate_tail) {
      for (const MemoryKernel* g : {&g1, &g2}) {
        const auto f = g->family();
        if (f != KernelFamily::Exponential && f != KernelFamily::IteratedExponential)
          throw ConfigError("truncate_tail: only exponential-type kernels have a finite tail mass");
      }
    }
  }
};

struct WaveState {
  int n = 1;
  double dr = 0.0;
  double dt = 0.0;
  std::vector<double> r;
  std::vector<double> u, u_prev, v, v_prev;
  std::vector<double> u1_init, v1_init;
  /// MGT auxiliary w = u_tt - Lap u
  std::vector<double> w_aux;
  /// Nonlinearity profiles per past step: hist_u[m] feeds the v equation (or u in Single mode),
  /// hist_v[m] feeds the u equation.
  std::vector<std::vector<double>> hist_u, hist_v;
  std::vector<std::size_t> extent_u, extent_v;
  double t = 0.0;
  std::size_t step = 0;
  double max_halo_leak = 0.0;
  double leak_time = 0.0, leak_radius = 0.0;
};

enum class StepSignal { Ok, MaxNorm, NonFinite };

namespace detail {

inline std::size_t support_extent(const std::vector<double>& h) {
  std::size_t e = h.size();
  while (e > 0 && h[e - 1] == 0.0) --e;
  return e;
}

inline std::vector<double> abs_pow(const std::vector<double>& u, double p) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] == 0.0 ? 0.0 : std::pow(std::abs(u[i]), p);
  return out;
}

}  // namespace detail

/// Discrete radial Laplacian; origin row uses the symmetric limit n u_rr, outer node is Dirichlet.
inline void radial_laplacian(int n, double dr, const std::vector<double>& u, std::vector<double>& out) {
  const std::size_t M = u.size() - 1;
  out.assign(u.size(), 0.0);
  const double inv = 1.0 / (dr * dr);
  out[0] = 2.0 * n * (u[1] - u[0]) * inv;
  const double c = 0.5 * (n - 1);
  for (std::size_t i = 1; i < M; ++i) {
    const double a = c / static_cast<double>(i);
    out[i] = ((1.0 + a) * u[i + 1] - 2.0 * u[i] + (1.0 - a) * u[i - 1]) * inv;
  }
  out[M] = 0.0;
}

class Solver {
 public:
  explicit Solver(SystemConfig cfg) : cfg_(std::move(cfg)), w1_(cfg_.g1, cfg_.dt()), w2_(cfg_.g2, cfg_.dt()) {
    cfg_.validate();
    M_ = cfg_.outer_index();
    R_ = cfg_.support_radius();
    if (cfg_.truncate_tail) {
      tail1_ = tail_mass(cfg_.g1);
      tail2_ = tail_mass(cfg_.g2);
    }
  }

  const SystemConfig& config() const { return cfg_; }
  std::size_t outer_index() const { return M_; }
  const HistoryWeights& weights_u() const { return w1_; }
  const HistoryWeights& weights_v() const { return w2_; }

  WaveState initial_state() const {
    WaveState s;
    s.n = cfg_.params.n;
    s.dr = cfg_.grid.dr;
    s.dt = cfg_.dt();
    s.r.resize(M_ + 1);
    for (std::size_t i = 0; i <= M_; ++i) s.r[i] = static_cast<double>(i) * s.dr;
    auto sample = [&](const Profile& pr) {
      std::vector<double> out(M_ + 1, 0.0);
      for (std::size_t i = 0; i < M_; ++i) out[i] = pr(s.r[i]);
      return out;
    };
    s.u = sample(cfg_.data.u0);
    s.u1_init = sample(cfg_.data.u1);
    if (cfg_.mode == Mode::Coupled) {
      s.v = sample(cfg_.data.v0);
      s.v1_init = sample(cfg_.data.v1);
    } else {
      s.v.assign(M_ + 1, 0.0);
      s.v1_init.assign(M_ + 1, 0.0);
    }
    s.u_prev = s.u;
    s.v_prev = s.v;
    if (cfg_.mode == Mode::MGT) s.w_aux.assign(M_ + 1, 0.0);
    push_history(s);
    return s;
  }

  /// Advance one step of size dt.
  StepSignal step(WaveState& s) const {
    if (cfg_.mode == Mode::MGT) return mgt_step(s);
    const std::size_t k = s.step;
    const double dt2 = s.dt * s.dt;
    std::vector<double> lap, F;
    radial_laplacian(s.n, s.dr, s.u, lap);
    const bool single = cfg_.mode == Mode::Single;
    forcing_into(w1_, single ? s.hist_u : s.hist_v, single ? s.extent_u : s.extent_v, k, tail1_, F);
    std::vector<double> nu = advance(s.u, s.u_prev, s.u1_init, lap, F, k, dt2, s.dt);
    std::vector<double> nv;
    if (cfg_.mode == Mode::Coupled) {
      radial_laplacian(s.n, s.dr, s.v, lap);
      forcing_into(w2_, s.hist_u, s.extent_u, k, tail2_, F);
      nv = advance(s.v, s.v_prev, s.v1_init, lap, F, k, dt2, s.dt);
    } else {
      nv = s.v;
    }
    s.u_prev = std::move(s.u);
    s.u = std::move(nu);
    s.v_prev = std::move(s.v);
    s.v = std::move(nv);
    s.step = k + 1;
    s.t = static_cast<double>(s.step) * s.dt;
    push_history(s);
    return finish(s);
  }

  /// Third-order MGT equation through w = u_tt - Lap u with w_t = |u|^p - w / beta:
  /// leapfrog for u, Crank-Nicolson for w.
  StepSignal mgt_step(WaveState& s) const {
    if (cfg_.mode != Mode::MGT) throw ConfigError("mgt_step: configuration is not in MGT mode");
    const std::size_t k = s.step;
    const double dt = s.dt, dt2 = dt * dt;
    const double beta = std::get<kernel_params::Exponential>(cfg_.g1.params()).beta;
    std::vector<double> lap;
    radial_laplacian(s.n, s.dr, s.u, lap);
    std::vector<double> F = cfg_.forcing ? s.w_aux : std::vector<double>(s.u.size(), 0.0);
    std::vector<double> nu = advance(s.u, s.u_prev, s.u1_init, lap, F, k, dt2, dt);
    if (cfg_.forcing) {
      const double p = cfg_.params.p;
      const double a = 1.0 - 0.5 * dt / beta, b = 1.0 / (1.0 + 0.5 * dt / beta);
      for (std::size_t i = 0; i < nu.size(); ++i) {
        const double h0 = s.u[i] == 0.0 ? 0.0 : std::pow(std::abs(s.u[i]), p);
        const double h1 = nu[i] == 0.0 ? 0.0 : std::pow(std::abs(nu[i]), p);
        s.w_aux[i] = (a * s.w_aux[i] + 0.5 * dt * (h0 + h1)) * b;
      }
    }
    s.u_prev = std::move(s.u);
    s.u = std::move(nu);
    s.step = k + 1;
    s.t = static_cast<double>(s.step) * dt;
    return finish(s);
  }

  /// Memory forcing g * h at step k from stored history profiles.
  void forcing_into(const HistoryWeights& w, const std::vector<std::vector<double>>& hist,
                    const std::vector<std::size_t>& extent, std::size_t k, double tail_mass_value,
                    std::vector<double>& F) const {
    F.assign(M_ + 1, 0.0);
    if (!cfg_.forcing || k == 0) return;
    std::size_t m_lo = 0;
    if (cfg_.truncate_tail) {
      const double Gk = w.kernel().antiderivative(static_cast<double>(k) * w.dt());
      std::size_t lag = k;
      while (lag > 0 && tail_mass_value - w.kernel().antiderivative(static_cast<double>(lag - 1) * w.dt()) <
                            1e-12 * Gk)
        --lag;
      m_lo = k - lag;
    }
    for (std::size_t m = m_lo; m <= k; ++m) {
      const double wt = w.weight(k, m);
      const std::vector<double>& h = hist[m];
      const std::size_t e = extent[m];
      for (std::size_t i = 0; i < e; ++i) F[i] += wt * h[i];
    }
  }

 private:
  static double tail_mass(const MemoryKernel& g) {
    if (g.family() == KernelFamily::Exponential) return std::get<kernel_params::Exponential>(g.params()).beta;
    const double c = std::get<kernel_params::IteratedExponential>(g.params()).c;
    return g.antiderivative(60.0 / c);
  }

  std::vector<double> advance(const std::vector<double>& u, const std::vector<double>& u_prev,
                              const std::vector<double>& u1, const std::vector<double>& lap,
                              const std::vector<double>& F, std::size_t k, double dt2, double dt) const {
    std::vector<double> nu(u.size(), 0.0);
    const std::size_t M = u.size() - 1;
    if (k == 0) {
      for (std::size_t i = 0; i < M; ++i) nu[i] = u[i] + dt * u1[i] + 0.5 * dt2 * (lap[i] + F[i]);
    } else {
      for (std::size_t i = 0; i < M; ++i) nu[i] = 2.0 * u[i] - u_prev[i] + dt2 * (lap[i] + F[i]);
    }
    nu[M] = 0.0;
    if (cfg_.params.n == 3) nu[0] = (4.0 * nu[1] - nu[2]) / 3.0;
    return nu;
  }

  void push_history(WaveState& s) const {
    if (cfg_.mode == Mode::MGT) return;
    if (cfg_.mode == Mode::Single) {
      s.hist_u.push_back(detail::abs_pow(s.u, cfg_.params.p));
      s.extent_u.push_back(detail::support_extent(s.hist_u.back()));
      return;
    }
    s.hist_u.push_back(detail::abs_pow(s.u, cfg_.params.q));
    s.extent_u.push_back(detail::support_extent(s.hist_u.back()));
    s.hist_v.push_back(detail::abs_pow(s.v, cfg_.params.p));
    s.extent_v.push_back(detail::support_extent(s.hist_v.back()));
  }

  StepSignal finish(WaveState& s) const {
    double mx = 0.0;
    bool finite = true;
    const double front = R_ + s.t + 2.0 * s.dr;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const double a = std::abs(s.u[i]), b = std::abs(s.v[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) finite = false;
      mx = std::max({mx, a, b});
      if (s.r[i] > front + 1e-12 && std::max(a, b) > s.max_halo_leak) {
        s.max_halo_leak = std::max(a, b);
        s.leak_time = s.t;
        s.leak_radius = s.r[i];
      }
    }
    if (!finite) return StepSignal::NonFinite;
    if (mx > cfg_.blowup_threshold) return StepSignal::MaxNorm;
    return StepSignal::Ok;
  }

  SystemConfig cfg_;
  HistoryWeights w1_, w2_;
  std::size_t M_ = 0;
  double R_ = 0.0;
  double tail1_ = 0.0, tail2_ = 0.0;
};

}  // namespace memwave
