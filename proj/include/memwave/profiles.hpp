#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "memwave/error.hpp"

namespace memwave {

enum class ProfileShape { Zero, SmoothedIndicator, CosineBump, Gaussian };

inline const char* to_string(ProfileShape s) {
  switch (s) {
    case ProfileShape::Zero: return "zero";
    case ProfileShape::SmoothedIndicator: return "smoothed_indicator";
    case ProfileShape::CosineBump: return "cosine_bump";
    case ProfileShape::Gaussian: return "gaussian";
  }
  return "?";
}

inline ProfileShape profile_shape_from_string(const std::string& s) {
  if (s == "zero") return ProfileShape::Zero;
  if (s == "smoothed_indicator") return ProfileShape::SmoothedIndicator;
  if (s == "cosine_bump") return ProfileShape::CosineBump;
  if (s == "gaussian") return ProfileShape::Gaussian;
  throw ConfigError("unknown profile shape '" + s + "' (expected zero, smoothed_indicator, cosine_bump, gaussian)");
}

/// Radial initial-data profile supported in [0, radius].
///
/// - SmoothedIndicator: A on [0, R/2], C-infinity transition to 0 at R.
/// - CosineBump: A cos^4(pi r / 2R).
/// - Gaussian: A exp(-9 r^2 / R^2), cut off at R.
struct Profile {
  ProfileShape shape = ProfileShape::Zero;
  double amplitude = 0.0;
  double radius = 1.0;

  static Profile zero() { return {}; }
  static Profile cosine_bump(double a, double r) { return {ProfileShape::CosineBump, a, r}; }
  static Profile smoothed_indicator(double a, double r) { return {ProfileShape::SmoothedIndicator, a, r}; }
  static Profile gaussian(double a, double r) { return {ProfileShape::Gaussian, a, r}; }

  bool is_zero() const { return shape == ProfileShape::Zero || amplitude == 0.0; }

  double operator()(double r) const {
    r = std::abs(r);
    if (is_zero() || r >= radius) return 0.0;
    switch (shape) {
      case ProfileShape::Zero: return 0.0;
      case ProfileShape::CosineBump: {
        const double c = std::cos(std::numbers::pi * r / (2.0 * radius));
        return amplitude * c * c * c * c;
      }
      case ProfileShape::SmoothedIndicator: {
        const double half = 0.5 * radius;
        if (r <= half) return amplitude;
        const double s = (r - half) / half;
        auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
        return amplitude * f(1.0 - s) / (f(1.0 - s) + f(s));
      }
      case ProfileShape::Gaussian: {
        const double x = r / radius;
        return amplitude * std::exp(-9.0 * x * x);
      }
    }
    return 0.0;
  }

  void validate(const std::string& where) const {
    if (shape == ProfileShape::Zero) return;
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError(where + ".radius: must be > 0");
    if (!std::isfinite(amplitude)) throw ConfigError(where + ".amplitude: must be finite");
  }
};

}  // namespace memwave
