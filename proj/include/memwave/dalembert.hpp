#pragma once

// One-dimensional light-cone representation
//   u(t,x) = (u0(x+t) + u0(x-t))/2 + 1/2 int_{x-t}^{x+t} u1 + 1/2 int_0^t int_{x-(t-s)}^{x+(t-s)} F(s,y) dy ds
// and a Picard iterator for the coupled memory system built on it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "memwave/error.hpp"
#include "memwave/history.hpp"
#include "memwave/solver.hpp"

namespace memwave {

/// Source F(k dt, i dx) for x >= 0, extended evenly to x < 0 and by zero past the table.
struct SourceGrid {
  double dt = 0.0;
  double dx = 0.0;
  std::vector<std::vector<double>> f;

  double at_node(std::size_t k, double x) const {
    const std::vector<double>& row = f[k];
    const double y = std::abs(x) / dx;
    const std::size_t i = static_cast<std::size_t>(y);
    if (i + 1 >= row.size()) return i < row.size() && y == static_cast<double>(i) ? row[i] : 0.0;
    const double th = y - static_cast<double>(i);
    return (1.0 - th) * row[i] + th * row[i + 1];
  }

  double at(double t, double x) const {
    const double y = t / dt;
    std::size_t k = static_cast<std::size_t>(y);
    if (k + 1 >= f.size()) return at_node(f.size() - 1, x);
    const double th = y - static_cast<double>(k);
    if (th < 1e-12) return at_node(k, x);
    return (1.0 - th) * at_node(k, x) + th * at_node(k + 1, x);
  }
};

namespace detail {

template <class F>
double simpson(F&& f, double a, double b, double h) {
  if (!(b > a)) return 0.0;
  std::size_t panels = static_cast<std::size_t>(std::ceil((b - a) / h));
  panels = std::max<std::size_t>(2, panels + (panels % 2));
  const double step = (b - a) / static_cast<double>(panels);
  double acc = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * step);
  return acc * step / 3.0;
}

}  // namespace detail

/// Exact 1D propagator with composite Simpson inner integrals at resolution `h`
/// (the source grid spacing when a source is given).
inline double dalembert_reference(int n, const std::function<double(double)>& u0,
                                  const std::function<double(double)>& u1, const SourceGrid* source, double t,
                                  double x, double h = 1e-3) {
  if (n != 1) throw UnsupportedError("dalembert_reference: the light-cone formula is implemented for n = 1 only");
  if (t < 0.0) throw DomainError("dalembert_reference: t must be >= 0");
  double out = 0.5 * (u0(x + t) + u0(x - t));
  out += 0.5 * detail::simpson(u1, x - t, x + t, h);
  if (source && !source->f.empty() && t > 0.0) {
    const double hx = source->dx, hs = source->dt;
    auto inner = [&](double s) {
      const double half = t - s;
      return detail::simpson([&](double y) { return source->at(s, y); }, x - half, x + half, hx);
    };
    out += 0.5 * detail::simpson(inner, 0.0, t, hs);
  }
  return out;
}

struct PicardReport {
  std::vector<double> distances;  // d_k = ||z_k - z_{k-1}|| in the energy norm, z_0 the linear part
  std::vector<double> ratios;     // d_{k+1} / d_k
  bool diverged = false;          // d increasing for three consecutive k
};

/// Picard iteration (u, v) <- N(u, v) on a space-time grid with dx = dt = h (n = 1).
///
/// Distances use max over t of ||w||_{L2} + ||w_x||_{L2} + ||w_t||_{L2} on the whole line, summed
/// over both components. Single-mode configs iterate u alone with F = g1 * |u|^p.
inline PicardReport picard_iterate(const SystemConfig& cfg, double T_small, int iterations, double h = 0.0) {
  if (cfg.params.n != 1) throw UnsupportedError("picard_iterate: requires n = 1");
  if (!(T_small > 0.0 && T_small <= 0.5)) throw ConfigError("picard_iterate: T must lie in (0, 0.5]");
  if (iterations < 1) throw ConfigError("picard_iterate: iterations must be >= 1");
  if (h <= 0.0) h = cfg.grid.dr;
  const std::size_t N = static_cast<std::size_t>(std::llround(T_small / h));
  h = T_small / static_cast<double>(N);
  const double R = std::max(cfg.support_radius(), h);
  const std::size_t M = static_cast<std::size_t>(std::ceil((R + T_small) / h)) + 2;
  const bool coupled = cfg.mode == Mode::Coupled;
  using Field = std::vector<std::vector<double>>;

  auto linear = [&](const Profile& a, const Profile& b) {
    Field out(N + 1, std::vector<double>(M + 1, 0.0));
    const double fine = std::min(h, 1e-3);
    for (std::size_t k = 0; k <= N; ++k)
      for (std::size_t i = 0; i <= M; ++i)
        out[k][i] = dalembert_reference(1, a, b, nullptr, k * h, i * h, fine);
    return out;
  };

  const HistoryWeights w1(cfg.g1, h), w2(cfg.g2, h);
  // Duhamel term of the memory forcing g * |z|^r for field z.
  auto duhamel = [&](const Field& z, double r, const HistoryWeights& w) {
    Field src(N + 1, std::vector<double>(M + 1, 0.0));
    std::vector<double> series(N + 1);
    for (std::size_t i = 0; i <= M; ++i) {
      for (std::size_t k = 0; k <= N; ++k) series[k] = std::pow(std::abs(z[k][i]), r);
      for (std::size_t k = 0; k <= N; ++k) src[k][i] = convolve_history(w, std::span<const double>(series).first(k + 1));
    }
    // C[m][i] = int_0^{i h} F(t_m, y) dy, odd in i
    Field C(N + 1, std::vector<double>(M + 1, 0.0));
    for (std::size_t m = 0; m <= N; ++m)
      for (std::size_t i = 1; i <= M; ++i) C[m][i] = C[m][i - 1] + 0.5 * h * (src[m][i - 1] + src[m][i]);
    auto cum = [&](std::size_t m, long long idx) {
      const long long lim = static_cast<long long>(M);
      const long long a = std::min(std::llabs(idx), lim);
      const double v = C[m][static_cast<std::size_t>(a)];
      return idx < 0 ? -v : v;
    };
    Field out(N + 1, std::vector<double>(M + 1, 0.0));
    for (std::size_t k = 1; k <= N; ++k)
      for (std::size_t i = 0; i <= M; ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m <= k; ++m) {
          const long long d = static_cast<long long>(k - m);
          const double seg = cum(m, static_cast<long long>(i) + d) - cum(m, static_cast<long long>(i) - d);
          acc += (m == 0 || m == k ? 0.5 : 1.0) * seg;
        }
        out[k][i] = 0.5 * h * acc;
      }
    return out;
  };

  auto energy_distance = [&](const Field& a, const Field& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
      double s0 = 0.0, sx = 0.0, st = 0.0;
      for (std::size_t i = 0; i <= M; ++i) {
        const double wgt = (i == 0 || i == M) ? 0.5 : 1.0;
        const double d = a[k][i] - b[k][i];
        double dx;
        if (i == 0)
          dx = 0.0;
        else if (i == M)
          dx = (d - (a[k][i - 1] - b[k][i - 1])) / h;
        else
          dx = ((a[k][i + 1] - b[k][i + 1]) - (a[k][i - 1] - b[k][i - 1])) / (2.0 * h);
        double dtv;
        if (k == 0)
          dtv = ((a[1][i] - b[1][i]) - d) / h;
        else if (k == N)
          dtv = (d - (a[k - 1][i] - b[k - 1][i])) / h;
        else
          dtv = ((a[k + 1][i] - b[k + 1][i]) - (a[k - 1][i] - b[k - 1][i])) / (2.0 * h);
        s0 += wgt * d * d;
        sx += wgt * dx * dx;
        st += wgt * dtv * dtv;
      }
      // whole line = twice the half line for even fields
      const double norm = std::sqrt(2.0 * h * s0) + std::sqrt(2.0 * h * sx) + std::sqrt(2.0 * h * st);
      worst = std::max(worst, norm);
    }
    return worst;
  };

  const Field u_lin = linear(cfg.data.u0, cfg.data.u1);
  const Field v_lin = coupled ? linear(cfg.data.v0, cfg.data.v1) : Field{};
  Field u = u_lin, v = v_lin;
  PicardReport rep;
  int rising = 0;
  for (int it = 0; it < iterations; ++it) {
    Field nu = u_lin, nv = v_lin;
    const Field du = coupled ? duhamel(v, cfg.params.p, w1) : duhamel(u, cfg.params.p, w1);
    for (std::size_t k = 0; k <= N; ++k)
      for (std::size_t i = 0; i <= M; ++i) nu[k][i] += du[k][i];
    double d = energy_distance(nu, u);
    if (coupled) {
      const Field dv = duhamel(u, cfg.params.q, w2);
      for (std::size_t k = 0; k <= N; ++k)
        for (std::size_t i = 0; i <= M; ++i) nv[k][i] += dv[k][i];
      d += energy_distance(nv, v);
    }
    if (!rep.distances.empty()) {
      const double prev = rep.distances.back();
      rep.ratios.push_back(prev > 0.0 ? d / prev : 0.0);
      rising = d > prev ? rising + 1 : 0;
      if (rising >= 3) rep.diverged = true;
    }
    rep.distances.push_back(d);
    u = std::move(nu);
    if (coupled) v = std::move(nv);
  }
  return rep;
}

}  // namespace memwave
