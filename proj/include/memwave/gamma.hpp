#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "memwave/error.hpp"

namespace memwave {

/// Euler Gamma function for x > 0 via the Lanczos approximation (g = 7, 9 terms)
/// with reflection below 1/2. Relative error is below 1e-13 on (0, 1).
inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw DomainError("gamma_fn: argument must be positive");
  constexpr double g = 7.0;
  constexpr std::array<double, 9> c{
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  }
  const double z = x - 1.0;
  double a = c[0];
  const double t = z + g + 0.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (z + i);
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

}  // namespace memwave
