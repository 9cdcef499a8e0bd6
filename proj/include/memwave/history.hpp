#pragma once

// Product-integration weights for the memory convolution
//   F(t_k) = int_0^{t_k} g(t_k - tau) f(tau) dtau,
// exact for piecewise-linear f on the uniform grid t_m = m dt.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "memwave/error.hpp"
#include "memwave/kernels.hpp"

namespace memwave {

class HistoryWeights {
 public:
  HistoryWeights(MemoryKernel g, double dt) : g_(std::move(g)), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("HistoryWeights: dt must be > 0");
  }

  const MemoryKernel& kernel() const { return g_; }
  double dt() const { return dt_; }

  /// Precompute lag moments so that rows up to index k are available.
  void reserve(std::size_t k) const { ensure(k + 1); }

  /// Weight on the sample at lag L = k - m for m >= 1.
  double lag_weight(std::size_t lag) const {
    ensure(lag + 1);
    if (lag == 0) return i0_[0] - i1_[0];
    return i1_[lag - 1] + i0_[lag] - i1_[lag];
  }

  /// Weight on the initial sample f(0) in row k >= 1.
  double origin_weight(std::size_t k) const {
    if (k == 0) return 0.0;
    ensure(k);
    return i1_[k - 1];
  }

  double weight(std::size_t k, std::size_t m) const {
    if (m > k) throw std::out_of_range("HistoryWeights: m > k");
    if (k == 0) return 0.0;
    return m == 0 ? origin_weight(k) : lag_weight(k - m);
  }

  /// w_{k,0..k}
  std::vector<double> row(std::size_t k) const {
    std::vector<double> w(k + 1);
    for (std::size_t m = 0; m <= k; ++m) w[m] = weight(k, m);
    return w;
  }

  /// int_{L dt}^{(L+1) dt} g, the mass of one lag cell.
  double cell_mass(std::size_t lag) const {
    ensure(lag + 1);
    return i0_[lag];
  }

 private:
  void ensure(std::size_t count) const {
    while (i0_.size() < count) {
      const std::size_t l = i0_.size();
      const double a = static_cast<double>(l) * dt_, b = static_cast<double>(l + 1) * dt_;
      const IntervalMoments mo = g_.moments(a, b);
      i0_.push_back(mo.m0);
      i1_.push_back(mo.m1 / dt_);
    }
  }

  MemoryKernel g_;
  double dt_;
  mutable std::vector<double> i0_, i1_;
};

/// Sum_m w_{k,m} samples[m] with k = samples.size() - 1.
inline double convolve_history(const HistoryWeights& w, std::span<const double> samples, std::size_t weight_count) {
  if (samples.size() != weight_count)
    throw std::length_error("convolve_history: sample count does not match weight count");
  if (samples.empty()) return 0.0;
  const std::size_t k = samples.size() - 1;
  if (k == 0) return 0.0;
  double acc = w.origin_weight(k) * samples[0];
  for (std::size_t m = 1; m <= k; ++m) acc += w.lag_weight(k - m) * samples[m];
  return acc;
}

inline double convolve_history(const HistoryWeights& w, std::span<const double> samples) {
  return convolve_history(w, samples, samples.size());
}

/// F_k for every prefix of the samples.
inline std::vector<double> convolve_all(const HistoryWeights& w, std::span<const double> samples) {
  std::vector<double> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) out[k] = convolve_history(w, samples.first(k + 1));
  return out;
}

/// Max |F' - w + F / beta| over interior grid points, F = g * w by product integration.
inline double conv_derivative_identity(const MemoryKernel& g, std::span<const double> samples,
                                       std::span<const double> t_grid) {
  if (g.family() != KernelFamily::Exponential)
    throw ConfigError("conv_derivative_identity: kernel must be exponential");
  if (samples.size() != t_grid.size()) throw std::length_error("conv_derivative_identity: size mismatch");
  if (t_grid.size() < 3) return 0.0;
  const double dt = t_grid[1] - t_grid[0];
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (std::abs((t_grid[k] - t_grid[k - 1]) - dt) > 1e-9 * dt)
      throw ConfigError("conv_derivative_identity: time grid must be uniform");
  const double beta = std::get<kernel_params::Exponential>(g.params()).beta;
  const HistoryWeights w(g, dt);
  const std::vector<double> F = convolve_all(w, samples);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < F.size(); ++k) {
    const double dF = (F[k + 1] - F[k - 1]) / (2.0 * dt);
    worst = std::max(worst, std::abs(dF - samples[k] + F[k] / beta));
  }
  return worst;
}

}  // namespace memwave
