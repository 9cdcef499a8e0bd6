#pragma once

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace memwave::quadrature {

/// Adaptive integral of f over [a, b]. The interval is cut into pieces of length
/// at most `piece` so oscillatory integrands stay resolved; the first piece uses
/// tanh-sinh when `singular_at_a` (integrable endpoint singularity).
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, bool singular_at_a = false,
                 double piece = 1.0) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  double lo = a;
  bool first = true;
  while (lo < b) {
    const double hi = std::min(b, lo + piece);
    if (first && singular_at_a) {
      boost::math::quadrature::tanh_sinh<double> ts;
      total += ts.integrate(f, lo, hi, rel_tol);
    } else {
      total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 15, rel_tol);
    }
    first = false;
    lo = hi;
  }
  return total;
}

}  // namespace memwave::quadrature
