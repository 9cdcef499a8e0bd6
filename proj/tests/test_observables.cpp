#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>
#include <gtest/gtest.h>

#include "memwave/observables.hpp"

using namespace memwave;

namespace {

WaveState state_from(int n, double dr, std::size_t M, double (*f)(double)) {
  WaveState s;
  s.n = n;
  s.dr = dr;
  s.dt = 0.5 * dr;
  for (std::size_t i = 0; i <= M; ++i) {
    s.r.push_back(static_cast<double>(i) * dr);
    s.u.push_back(f(s.r.back()));
  }
  s.v.assign(M + 1, 0.0);
  s.u_prev = s.u;
  s.v_prev = s.v;
  return s;
}

SystemConfig coupled_default(double dr, double t_max) {
  SystemConfig c;
  c.params.n = 1;
  c.g1 = MemoryKernel::riemann_liouville(0.5);
  c.g2 = MemoryKernel::exponential(1.0);
  c.grid.dr = dr;
  c.t_max = t_max;
  const Profile b = Profile::cosine_bump(1.0, 1.0);
  c.data = {b, b, b, b};
  return c;
}

}  // namespace

TEST(Phi, Values) {
  EXPECT_EQ(phi_eigenfunction(1, 0.0), 2.0);
  EXPECT_NEAR(phi_eigenfunction(1, 1.5), 2.0 * std::cosh(1.5), 1e-14);
  EXPECT_NEAR(phi_eigenfunction(3, 0.0), 4.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(phi_eigenfunction(3, 2.0), 4.0 * std::numbers::pi * std::sinh(2.0) / 2.0, 1e-13);
  EXPECT_THROW(phi_eigenfunction(4, 1.0), UnsupportedError);
  EXPECT_THROW(phi_eigenfunction(1, -1.0), DomainError);
}

TEST(Phi, SphereIntegralOracles) {
  // n = 2: int_0^{2 pi} e^{r cos theta} d theta
  for (double r : {0.5, 1.0, 3.0}) {
    const double ref = boost::math::quadrature::trapezoidal([r](double th) { return std::exp(r * std::cos(th)); }, 0.0,
                                                            2.0 * std::numbers::pi, 1e-15);
    EXPECT_NEAR(phi_eigenfunction(2, r), ref, 1e-12 * ref);
  }
  EXPECT_NEAR(phi_eigenfunction(2, 1.0), 2.0 * std::numbers::pi * 1.2660658778, 1e-8);
  // n = 3 near the origin: 2 pi int_0^pi e^{r cos theta} sin theta d theta = 2 pi int_{-1}^{1} e^{r x} dx
  const double r = 1e-3;
  const double ref = 2.0 * std::numbers::pi *
                     boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                         [r](double x) { return std::exp(r * x); }, -1.0, 1.0, 5, 1e-15);
  EXPECT_NEAR(phi_eigenfunction(3, r), ref, 1e-12);
}

TEST(Phi, DiscreteEigenIdentity) {
  for (int n = 1; n <= 3; ++n) EXPECT_LT(discrete_eigen_residual(n, 1e-3, 0.1, 5.0), 1e-3) << n;
}

TEST(Functionals, BallVolume) {
  const double dr = 1e-3;
  const WaveState s = state_from(3, dr, 1500, [](double r) { return r < 1.0 - 1e-12 ? 1.0 : (r < 1.0 + 1e-12 ? 0.5 : 0.0); });
  SystemConfig c;
  c.params.n = 3;
  c.mode = Mode::Single;
  const TraceRow row = compute_functionals(s, c);
  EXPECT_NEAR(row.U, 4.0 * std::numbers::pi / 3.0, 1e-5);
  EXPECT_EQ(row.maxnorm_u, 1.0);
  // |u|^2 differs from u only at the half-valued node r = 1, weight 4 pi dr
  EXPECT_NEAR(row.U - row.Lp_v, 4.0 * std::numbers::pi * dr * (0.5 - 0.25), 1e-12);
  EXPECT_EQ(row.V, 0.0);
}

TEST(Functionals, ZeroField) {
  const WaveState s = state_from(2, 0.01, 200, [](double) { return 0.0; });
  SystemConfig c;
  c.params.n = 2;
  const TraceRow row = compute_functionals(s, c);
  for (double x : {row.U, row.V, row.U0, row.V0, row.Lp_v, row.Lq_u, row.maxnorm_u, row.maxnorm_v}) EXPECT_EQ(x, 0.0);
}

TEST(UDoublePrime, CoupledRunResidual) {
  for (double dr : {1.0 / 100, 1.0 / 200}) {
    const SystemConfig c = coupled_default(dr, 3.0);
    const auto run = run_simulation(c);
    EXPECT_LT(check_u_doubleprime_identity(run.trace, c.g1, 0.5, 3.0), 0.05) << dr;
  }
}

TEST(UDoublePrime, ZeroAndLinear) {
  SystemConfig c = coupled_default(0.02, 2.0);
  c.data = {Profile::zero(), Profile::zero(), Profile::zero(), Profile::zero()};
  EXPECT_EQ(check_u_doubleprime_identity(run_simulation(c).trace, c.g1), 0.0);
  c = coupled_default(0.02, 2.0);
  c.forcing = false;
  const auto tr = run_simulation(c).trace;
  for (std::size_t k = 1; k + 1 < tr.rows.size(); ++k) {
    const double upp = (tr.rows[k + 1].U - 2 * tr.rows[k].U + tr.rows[k - 1].U) / (tr.dt * tr.dt);
    EXPECT_NEAR(upp, 0.0, 1e-8);
  }
  FunctionalTrace shortt{0.1, std::vector<TraceRow>(5)};
  EXPECT_THROW(check_u_doubleprime_identity(shortt, c.g1), InsufficientDataError);
}

TEST(U0Bound, HoldsForNonnegativeData) {
  for (int n = 1; n <= 3; ++n) {
    SystemConfig c = coupled_default(0.02, 2.0);
    c.params.n = n;
    const auto b = check_u0_lower_bound(run_simulation(c).trace, c);
    EXPECT_TRUE(b.holds) << n;
    EXPECT_GT(b.checked, 10u);
  }
}

TEST(U0Bound, ZeroDataMarginZero) {
  SystemConfig c = coupled_default(0.02, 1.0);
  c.data = {Profile::zero(), Profile::zero(), Profile::zero(), Profile::zero()};
  const auto b = check_u0_lower_bound(run_simulation(c).trace, c);
  EXPECT_TRUE(b.holds);
  EXPECT_EQ(b.worst_margin, 0.0);
}

TEST(U0Bound, SwappedCoefficientsFailAtStart) {
  SystemConfig c = coupled_default(0.02, 1.0);
  c.data.u0 = Profile::zero();
  const auto run = run_simulation(c);
  const PhiMoments m = phi_moments(c);
  EXPECT_TRUE(check_u0_lower_bound(run.trace, c).holds);
  EXPECT_EQ(run.trace.rows[0].U0, 0.0);
  EXPECT_GT(u0_lower_bound_swapped(0.0, m.u0, m.u1), 0.1);
  EXPECT_EQ(u0_lower_bound(0.0, m.u0, m.u1), 0.0);
}

TEST(IterationFrame, Holds) {
  const SystemConfig c = coupled_default(0.02, 3.0);
  const auto b = check_iteration_frame(run_simulation(c).trace, c);
  EXPECT_TRUE(b.holds);
  EXPECT_GE(b.worst_margin, 0.0);
  SystemConfig z = c;
  z.data = {Profile::zero(), Profile::zero(), Profile::zero(), Profile::zero()};
  EXPECT_TRUE(check_iteration_frame(run_simulation(z).trace, z).holds);
  z.mode = Mode::Single;
  EXPECT_THROW(check_iteration_frame(run_simulation(z).trace, z), ConfigError);
}

TEST(Blowup, LinearRunIsGlobal) {
  SystemConfig c = coupled_default(0.02, 3.0);
  c.forcing = false;
  const auto run = run_simulation(c);
  const auto v = detect_blowup(run, c);
  EXPECT_FALSE(v.blew_up);
  EXPECT_EQ(v.trigger, Trigger::ReachedTmax);
  EXPECT_FALSE(v.T_estimate.has_value());
}

TEST(Blowup, ConstantKernelLargeData) {
  SystemConfig c;
  c.params.n = 1;
  c.params.p = 2;
  c.mode = Mode::Single;
  c.g1 = MemoryKernel::constant(1.0);
  c.grid.dr = 0.01;
  c.t_max = 20.0;
  c.data.u0 = Profile::cosine_bump(10.0, 1.0);
  c.data.u1 = Profile::cosine_bump(10.0, 1.0);
  const auto run = run_simulation(c);
  const auto v = detect_blowup(run, c);
  EXPECT_TRUE(v.blew_up);
  EXPECT_LT(v.t_stop, 20.0);
  ASSERT_TRUE(v.T_estimate.has_value());
  EXPECT_GE(*v.T_estimate, v.t_stop - 1e-9);
  EXPECT_LE(v.ci_low, *v.T_estimate);
  EXPECT_GE(v.ci_high, *v.T_estimate);
  EXPECT_GT(v.r_squared, 0.99);
}

TEST(Blowup, RateExponent) {
  SystemConfig c;
  c.params.p = 2;
  c.params.q = 3;
  c.mode = Mode::Single;
  EXPECT_DOUBLE_EQ(blowup_rate_exponent(c, BlowupRate::MemoryOde), 3.0);
  EXPECT_DOUBLE_EQ(blowup_rate_exponent(c, BlowupRate::FirstOrder), 1.0);
  c.mode = Mode::Coupled;
  c.g1 = MemoryKernel::riemann_liouville(0.5);
  EXPECT_DOUBLE_EQ(blowup_rate_exponent(c, BlowupRate::MemoryOde), (2.5 + 2.0 * 3.0) / 5.0);
  EXPECT_EQ(blowup_rate_from_string("first_order"), BlowupRate::FirstOrder);
  EXPECT_THROW(blowup_rate_from_string("quadratic"), ConfigError);
}

TEST(Weights, RadialTrapezoid) {
  const auto w = radial_weights(1, 0.5, 4);
  EXPECT_EQ(w[0], 0.5);
  EXPECT_EQ(w[1], 1.0);
  EXPECT_EQ(w[4], 0.5);
  EXPECT_THROW(sphere_measure(5), UnsupportedError);
}
