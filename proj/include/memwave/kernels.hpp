#pragma once

// Memory kernels g(t) for the convolution nonlinearity (g * |w|^r)(t) and their
// classification against the t^{-1} decay threshold.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "memwave/error.hpp"
#include "memwave/gamma.hpp"
#include "memwave/quadrature.hpp"

namespace memwave {

enum class KernelFamily {
  RiemannLiouville,
  PolynomialShifted,
  Exponential,
  IteratedExponential,
  OscillatingPolynomial,
  Constant,
  Custom
};

namespace kernel_params {

/// scale * t^{-gamma} / Gamma(1 - gamma), gamma in (0, 1).
struct RiemannLiouville {
  double gamma;
  double scale = 1.0;
};
/// (1 + t)^{-gamma}, gamma >= 0.
struct PolynomialShifted {
  double gamma;
};
/// exp(-t / beta), beta > 0.
struct Exponential {
  double beta;
};
/// exp(-(E_{depth-1}(c t) - E_{depth-1}(0))) with E_0(x) = x, E_k = exp(E_{k-1}).
struct IteratedExponential {
  int depth;
  double c;
};
/// (3 + 2 sin t) t^{-gamma}, gamma in [0, 1).
struct OscillatingPolynomial {
  double gamma;
};
struct Constant {
  double c;
};
/// Log-log interpolated samples; power-law extension outside the table.
struct Tabulated {
  std::vector<double> t;
  std::vector<double> g;
  double lower_exponent = 0.0;
  double upper_exponent = 0.0;
  std::vector<double> cumulative;  // integral of the interpolant from 0 to t[i]
};

}  // namespace kernel_params

enum class Decay { Slow, Fast, Indeterminate };

inline const char* to_string(Decay d) {
  switch (d) {
    case Decay::Slow: return "Slow";
    case Decay::Fast: return "Fast";
    case Decay::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct DecayClass {
  Decay tag;
  double t0 = 0.0;
  /// Fitted log-log slope for tabulated kernels; NaN for analytic families.
  double slope = std::numeric_limits<double>::quiet_NaN();
};

/// Integrals of g over [a, b]: m0 = int g, m1 = int g(s) (s - a) ds.
struct IntervalMoments {
  double m0;
  double m1;
};

namespace detail {

// E_k evaluated at 0 together with its first two derivatives.
struct TowerJet {
  double value;
  double d1;
  double d2;
};

inline TowerJet tower_jet_at_zero(int k) {
  TowerJet j{0.0, 1.0, 0.0};
  for (int i = 0; i < k; ++i) {
    const double v = std::exp(j.value);
    j = TowerJet{v, v * j.d1, v * (j.d1 * j.d1 + j.d2)};
  }
  return j;
}

inline double tower(int k, double x) {
  for (int i = 0; i < k; ++i) x = std::exp(x);
  return x;
}

// integral of g_i (s / t_i)^e over [a, b]
inline double power_segment_integral(double gi, double ti, double e, double a, double b) {
  if (b <= a) return 0.0;
  if (std::abs(e + 1.0) < 1e-12) return gi * ti * std::log(b / a);
  const double lo = a > 0.0 ? std::pow(a / ti, e + 1.0) : 0.0;
  return gi * ti * (std::pow(b / ti, e + 1.0) - lo) / (e + 1.0);
}

}  // namespace detail

class MemoryKernel {
 public:
  using Params = std::variant<kernel_params::RiemannLiouville, kernel_params::PolynomialShifted,
                              kernel_params::Exponential, kernel_params::IteratedExponential,
                              kernel_params::OscillatingPolynomial, kernel_params::Constant,
                              kernel_params::Tabulated>;

  static MemoryKernel riemann_liouville(double gamma, double scale = 1.0) {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw ConfigError("RiemannLiouville: gamma must lie in (0, 1), got " + std::to_string(gamma));
    if (!(scale > 0.0)) throw ConfigError("RiemannLiouville: scale must be positive");
    return MemoryKernel(kernel_params::RiemannLiouville{gamma, scale});
  }
  static MemoryKernel polynomial_shifted(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw ConfigError("PolynomialShifted: gamma must be >= 0");
    return MemoryKernel(kernel_params::PolynomialShifted{gamma});
  }
  static MemoryKernel exponential(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("Exponential: beta must be positive");
    return MemoryKernel(kernel_params::Exponential{beta});
  }
  static MemoryKernel iterated_exponential(int depth, double c) {
    if (depth < 1 || depth > 4) throw ConfigError("IteratedExponential: depth must lie in [1, 4]");
    if (!(c > 0.0)) throw ConfigError("IteratedExponential: c must be positive");
    return MemoryKernel(kernel_params::IteratedExponential{depth, c});
  }
  static MemoryKernel oscillating_polynomial(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw ConfigError("OscillatingPolynomial: gamma must lie in [0, 1)");
    return MemoryKernel(kernel_params::OscillatingPolynomial{gamma});
  }
  static MemoryKernel constant(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("Constant: c must be positive");
    return MemoryKernel(kernel_params::Constant{c});
  }
  /// Tabulated kernel from strictly increasing positive times and positive values.
  static MemoryKernel custom(std::vector<double> t, std::vector<double> g) {
    if (t.size() != g.size()) throw ConfigError("Custom: time and value columns differ in length");
    if (t.size() < 2) throw ConfigError("Custom: at least two samples are required");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!(t[i] > 0.0) || !(g[i] > 0.0) || !std::isfinite(t[i]) || !std::isfinite(g[i]))
        throw ConfigError("Custom: samples must be positive and finite");
      if (i > 0 && !(t[i] > t[i - 1])) throw ConfigError("Custom: sample times must increase");
    }
    kernel_params::Tabulated tab;
    tab.t = std::move(t);
    tab.g = std::move(g);
    const std::size_t n = tab.t.size();
    tab.lower_exponent = std::min(0.0, segment_slope(tab, 0));
    tab.upper_exponent = segment_slope(tab, n - 2);
    if (!(tab.lower_exponent > -1.0))
      throw ConfigError("Custom: samples imply a non-integrable singularity at t = 0");
    finish_table(tab);
    return MemoryKernel(std::move(tab));
  }

  KernelFamily family() const { return static_cast<KernelFamily>(params_.index()); }
  const Params& params() const { return params_; }

  /// s in g(t) ~ t^{-s} as t -> 0+.
  double singularity_order() const {
    using namespace kernel_params;
    return std::visit(
        [](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RiemannLiouville> || std::is_same_v<K, OscillatingPolynomial>)
            return k.gamma;
          else if constexpr (std::is_same_v<K, Tabulated>)
            return -k.lower_exponent;
          else
            return 0.0;
        },
        params_);
  }

  bool singular_at_zero() const { return singularity_order() > 0.0; }

  double value(double t) const {
    if (t < 0.0 || std::isnan(t)) throw DomainError("kernel evaluated at negative time");
    if (t == 0.0 && singular_at_zero()) throw DomainError("singular kernel evaluated at t = 0");
    using namespace kernel_params;
    return std::visit(
        [t](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RiemannLiouville>) {
            return k.scale * std::pow(t, -k.gamma) / gamma_fn(1.0 - k.gamma);
          } else if constexpr (std::is_same_v<K, PolynomialShifted>) {
            return std::pow(1.0 + t, -k.gamma);
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return std::exp(-t / k.beta);
          } else if constexpr (std::is_same_v<K, IteratedExponential>) {
            const double h = detail::tower(k.depth - 1, k.c * t) - detail::tower(k.depth - 1, 0.0);
            return std::exp(-h);
          } else if constexpr (std::is_same_v<K, OscillatingPolynomial>) {
            return (3.0 + 2.0 * std::sin(t)) * (k.gamma == 0.0 ? 1.0 : std::pow(t, -k.gamma));
          } else if constexpr (std::is_same_v<K, Constant>) {
            return k.c;
          } else {
            return tabulated_value(k, t);
          }
        },
        params_);
  }

  /// G(t) = int_0^t g.
  double antiderivative(double t) const {
    if (t < 0.0 || std::isnan(t)) throw DomainError("antiderivative at negative time");
    if (t == 0.0) return 0.0;
    using namespace kernel_params;
    return std::visit(
        [this, t](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RiemannLiouville>) {
            return k.scale * std::pow(t, 1.0 - k.gamma) / ((1.0 - k.gamma) * gamma_fn(1.0 - k.gamma));
          } else if constexpr (std::is_same_v<K, PolynomialShifted>) {
            if (std::abs(k.gamma - 1.0) < 1e-14) return std::log1p(t);
            return std::expm1((1.0 - k.gamma) * std::log1p(t)) / (1.0 - k.gamma);
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return -k.beta * std::expm1(-t / k.beta);
          } else if constexpr (std::is_same_v<K, Constant>) {
            return k.c * t;
          } else if constexpr (std::is_same_v<K, OscillatingPolynomial>) {
            // 3 t^{1-gamma}/(1-gamma) + 2 int_0^t sin(s) s^{-gamma} ds
            const double gm = k.gamma;
            const double smooth = 3.0 * std::pow(t, 1.0 - gm) / (1.0 - gm);
            auto f = [gm](double s) { return s == 0.0 ? 0.0 : std::sin(s) * std::pow(s, -gm); };
            return smooth + 2.0 * quadrature::integrate(f, 0.0, t, 1e-13, false, 1.0);
          } else if constexpr (std::is_same_v<K, IteratedExponential>) {
            // integrand is negligible once the exponent exceeds ~745
            const double end = std::min(t, iterated_cutoff(k));
            auto f = [this](double s) { return value(s); };
            return quadrature::integrate(f, 0.0, end, 1e-13, false, 0.25 / k.c);
          } else {
            return tabulated_antiderivative(k, t);
          }
        },
        params_);
  }

  /// G2(t) = int_0^t G = int_0^t (t - s) g(s) ds.
  double second_antiderivative(double t) const {
    if (t < 0.0) throw DomainError("second antiderivative at negative time");
    if (t == 0.0) return 0.0;
    using namespace kernel_params;
    return std::visit(
        [this, t](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RiemannLiouville>) {
            const double gm = k.gamma;
            return k.scale * std::pow(t, 2.0 - gm) / ((1.0 - gm) * (2.0 - gm) * gamma_fn(1.0 - gm));
          } else if constexpr (std::is_same_v<K, PolynomialShifted>) {
            const double gm = k.gamma;
            if (std::abs(gm - 1.0) < 1e-14) return (1.0 + t) * std::log1p(t) - t;
            if (std::abs(gm - 2.0) < 1e-14) return t - std::log1p(t);
            return std::expm1((2.0 - gm) * std::log1p(t)) / ((1.0 - gm) * (2.0 - gm)) - t / (1.0 - gm);
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return k.beta * t + k.beta * k.beta * std::expm1(-t / k.beta);
          } else if constexpr (std::is_same_v<K, Constant>) {
            return 0.5 * k.c * t * t;
          } else {
            auto f = [this, t](double s) { return (t - s) * value_or_zero(s); };
            return quadrature::integrate(f, 0.0, t, 1e-13, singular_at_zero(), 1.0);
          }
        },
        params_);
  }

  /// int_a^b g and int_a^b g(s)(s - a) ds for 0 <= a < b.
  IntervalMoments moments(double a, double b) const {
    if (!(b > a) || a < 0.0) throw DomainError("moments: need 0 <= a < b");
    switch (family()) {
      case KernelFamily::RiemannLiouville:
      case KernelFamily::PolynomialShifted:
      case KernelFamily::Exponential:
      case KernelFamily::Constant: {
        const double m0 = antiderivative(b) - antiderivative(a);
        const double m1 = antiderivative(b) * (b - a) - (second_antiderivative(b) - second_antiderivative(a));
        return {m0, m1};
      }
      default: break;
    }
    const bool sing = a == 0.0 && singular_at_zero();
    auto f0 = [this](double s) { return value_or_zero(s); };
    auto f1 = [this, a](double s) { return (s - a) * value_or_zero(s); };
    const double piece = std::max(b - a, 1e-300);
    return {quadrature::integrate(f0, a, b, 1e-13, sing, piece),
            quadrature::integrate(f1, a, b, 1e-13, sing, piece)};
  }

  /// True when g is C^2 on [0, T] (finite g(0), g'(0), g''(0)).
  bool smooth_at_zero() const {
    switch (family()) {
      case KernelFamily::PolynomialShifted:
      case KernelFamily::Exponential:
      case KernelFamily::IteratedExponential:
      case KernelFamily::Constant: return true;
      case KernelFamily::OscillatingPolynomial:
        return std::get<kernel_params::OscillatingPolynomial>(params_).gamma == 0.0;
      default: return false;
    }
  }

  struct Jet {
    double g0, g1, g2;
  };
  /// g(0), g'(0), g''(0); UnsupportedError unless smooth_at_zero().
  Jet jet_at_zero() const {
    if (!smooth_at_zero()) throw UnsupportedError("kernel is not C^2 at t = 0");
    using namespace kernel_params;
    return std::visit(
        [](const auto& k) -> Jet {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PolynomialShifted>) {
            return {1.0, -k.gamma, k.gamma * (k.gamma + 1.0)};
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return {1.0, -1.0 / k.beta, 1.0 / (k.beta * k.beta)};
          } else if constexpr (std::is_same_v<K, IteratedExponential>) {
            const auto j = detail::tower_jet_at_zero(k.depth - 1);
            const double h1 = k.c * j.d1;
            const double h2 = k.c * k.c * j.d2;
            return {1.0, -h1, h1 * h1 - h2};
          } else if constexpr (std::is_same_v<K, OscillatingPolynomial>) {
            return {3.0, 2.0, 0.0};
          } else if constexpr (std::is_same_v<K, Constant>) {
            return {k.c, 0.0, 0.0};
          } else {
            return {0.0, 0.0, 0.0};
          }
        },
        params_);
  }

  std::string name() const {
    using namespace kernel_params;
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RiemannLiouville>) return "riemann_liouville";
          else if constexpr (std::is_same_v<K, PolynomialShifted>) return "polynomial_shifted";
          else if constexpr (std::is_same_v<K, Exponential>) return "exponential";
          else if constexpr (std::is_same_v<K, IteratedExponential>) return "iterated_exponential";
          else if constexpr (std::is_same_v<K, OscillatingPolynomial>) return "oscillating_polynomial";
          else if constexpr (std::is_same_v<K, Constant>) return "constant";
          else return "custom";
        },
        params_);
  }

  /// value(t), except 0 at a singular origin (for quadrature nodes that land on 0).
  double value_or_zero(double t) const {
    if (t == 0.0 && singular_at_zero()) return 0.0;
    return value(t);
  }

 private:
  explicit MemoryKernel(Params p) : params_(std::move(p)) {}

  static double segment_slope(const kernel_params::Tabulated& tab, std::size_t i) {
    return std::log(tab.g[i + 1] / tab.g[i]) / std::log(tab.t[i + 1] / tab.t[i]);
  }

  static void finish_table(kernel_params::Tabulated& tab) {
    const std::size_t n = tab.t.size();
    tab.cumulative.assign(n, 0.0);
    tab.cumulative[0] = detail::power_segment_integral(tab.g[0], tab.t[0], tab.lower_exponent, 0.0, tab.t[0]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      tab.cumulative[i + 1] = tab.cumulative[i] + detail::power_segment_integral(
                                                      tab.g[i], tab.t[i], segment_slope(tab, i), tab.t[i],
                                                      tab.t[i + 1]);
    }
  }

  static double tabulated_value(const kernel_params::Tabulated& k, double t) {
    const std::size_t n = k.t.size();
    if (t <= k.t.front()) return k.g.front() * std::pow(t / k.t.front(), k.lower_exponent);
    if (t >= k.t.back()) return k.g.back() * std::pow(t / k.t.back(), k.upper_exponent);
    const auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - k.t.begin()) - 1;
    (void)n;
    return k.g[i] * std::pow(t / k.t[i], segment_slope(k, i));
  }

  static double tabulated_antiderivative(const kernel_params::Tabulated& k, double t) {
    if (t <= k.t.front())
      return detail::power_segment_integral(k.g.front(), k.t.front(), k.lower_exponent, 0.0, t);
    if (t >= k.t.back())
      return k.cumulative.back() +
             detail::power_segment_integral(k.g.back(), k.t.back(), k.upper_exponent, k.t.back(), t);
    const auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - k.t.begin()) - 1;
    return k.cumulative[i] + detail::power_segment_integral(k.g[i], k.t[i], segment_slope(k, i), k.t[i], t);
  }

  static double iterated_cutoff(const kernel_params::IteratedExponential& k) {
    // smallest t with E_{d-1}(c t) - E_{d-1}(0) > 745 (g underflows past it)
    double target = 745.0 + detail::tower(k.depth - 1, 0.0);
    for (int i = 1; i < k.depth; ++i) target = std::log(target);
    return target / k.c;
  }

  friend MemoryKernel minorant(const MemoryKernel& k);

  Params params_;
};

inline double eval_kernel(const MemoryKernel& k, double t) { return k.value(t); }
inline double eval_antiderivative(const MemoryKernel& k, double t) { return k.antiderivative(t); }

/// Decay class against t^{-1}; tabulated kernels are fitted over the last decade of samples.
inline DecayClass classify_decay(const MemoryKernel& k) {
  using namespace kernel_params;
  switch (k.family()) {
    case KernelFamily::RiemannLiouville:
    case KernelFamily::OscillatingPolynomial:
    case KernelFamily::Constant: return {Decay::Slow, 0.0};
    case KernelFamily::PolynomialShifted:
      return {std::get<PolynomialShifted>(k.params()).gamma >= 1.0 ? Decay::Fast : Decay::Slow, 0.0};
    case KernelFamily::Exponential:
    case KernelFamily::IteratedExponential: return {Decay::Fast, 0.0};
    case KernelFamily::Custom: break;
  }
  const auto& tab = std::get<Tabulated>(k.params());
  const std::size_t n = tab.t.size();
  if (n < 16) throw InsufficientDataError("classify_decay: custom kernel needs at least 16 samples");
  const double t_last = tab.t.back();
  std::size_t first = n - 1;
  while (first > 0 && tab.t[first - 1] >= t_last / 10.0) --first;
  if (n - first < 2) first = n - 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n - first);
  for (std::size_t i = first; i < n; ++i) {
    const double x = std::log(tab.t[i]);
    const double y = std::log(tab.g[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  DecayClass out{Decay::Indeterminate, 0.0, slope};
  if (std::abs(slope + 1.0) <= 0.05) return out;
  out.tag = slope > -1.0 ? Decay::Slow : Decay::Fast;
  // onset: smallest sample time from which t g(t) stays on the right side of a fixed bound
  const double bound = out.tag == Decay::Slow ? 0.5 * tab.t.back() * tab.g.back()
                                              : 2.0 * tab.t[first] * tab.g[first];
  std::size_t onset = n;
  for (std::size_t i = n; i-- > 0;) {
    const double tg = tab.t[i] * tab.g[i];
    const bool ok = out.tag == Decay::Slow ? tg >= bound : tg <= bound;
    if (!ok) break;
    onset = i;
  }
  out.t0 = onset < n ? tab.t[onset] : tab.t.back();
  return out;
}

/// Non-increasing kernel bounded above by k (Slow-class inputs only).
inline MemoryKernel minorant(const MemoryKernel& k) {
  using namespace kernel_params;
  const DecayClass dc = classify_decay(k);
  if (dc.tag != Decay::Slow) throw UnsupportedError("minorant: kernel is not Slow-class");
  switch (k.family()) {
    case KernelFamily::OscillatingPolynomial: {
      const double gm = std::get<OscillatingPolynomial>(k.params()).gamma;
      if (gm == 0.0) return MemoryKernel::constant(1.0);
      return MemoryKernel::riemann_liouville(gm, gamma_fn(1.0 - gm));
    }
    case KernelFamily::Custom: {
      Tabulated tab = std::get<Tabulated>(k.params());
      for (std::size_t i = 1; i < tab.g.size(); ++i) tab.g[i] = std::min(tab.g[i], tab.g[i - 1]);
      tab.upper_exponent = std::min(tab.upper_exponent, 0.0);
      MemoryKernel::finish_table(tab);
      return MemoryKernel(std::move(tab));
    }
    default: return k;
  }
}

}  // namespace memwave
