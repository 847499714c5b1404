#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tipping/error.hpp"
#include "tipping/fpe1d.hpp"

using namespace tipping;

namespace {

// Survival of pure diffusion (D = 1) on [-L, L] from N(0, var0), absorbing ends.
double diffusion_survival(double L, double var0, double t) {
  const double pi = std::acos(-1.0);
  double s = 0.0;
  for (int k = 0; k < 200; ++k) {
    double kn = (2 * k + 1) * pi / (2 * L);
    s += (k % 2 ? -1.0 : 1.0) * 2.0 / (L * kn) * std::exp(-var0 * kn * kn / 2 - kn * kn * t);
  }
  return s;
}

}  // namespace

TEST(Fpe1d, MassDecaysAndDensityStaysNonnegative) {
  for (auto [p0, p2] : {std::pair{0.0, 1.0}, {-1.0, 0.25}, {0.5, 1.0}, {-3.0, 2.0}}) {
    FpeResult r = solve_fpe_1d(p0, p2);
    ASSERT_GT(r.mass.size(), 2u);
    EXPECT_NEAR(r.mass.front(), 1.0, 1e-9);
    for (std::size_t i = 1; i < r.mass.size(); ++i) EXPECT_LE(r.mass[i], r.mass[i - 1] + 1e-13);
    EXPECT_GE(r.min_density, -1e-10);
    EXPECT_NEAR(r.P_esc, 1.0 - r.mass.back(), 1e-12);
  }
}

TEST(Fpe1d, EscapeProbabilityIsMonotone) {
  double prev = -1.0;
  for (double p0 : {-3.0, -1.5, -0.5, 0.0, 0.5, 1.0}) {
    double P = solve_fpe_1d(p0, 1.0).P_esc;
    EXPECT_GT(P, prev) << p0;
    prev = P;
  }
  // A faster passage (larger p2 at fixed p0) lowers the escape probability.
  prev = 2.0;
  for (double p2 : {0.25, 0.5, 1.0, 2.0}) {
    double P = solve_fpe_1d(0.0, p2).P_esc;
    EXPECT_LT(P, prev) << p2;
    prev = P;
  }
}

TEST(Fpe1d, SelfConvergenceInTime) {
  FpeGrid1D g;
  FpeResult coarse = solve_fpe_1d(0.0, 1.0, g);
  g.nt = 2 * coarse.nt;
  FpeResult fine = solve_fpe_1d(0.0, 1.0, g);
  EXPECT_LT(std::abs(fine.P_esc - coarse.P_esc), 1e-3);
}

TEST(Fpe1d, SelfConvergenceInSpace) {
  FpeGrid1D g;
  double a = solve_fpe_1d(-1.0, 0.5, g).P_esc;
  g.nx = 2 * g.nx - 1;
  double b = solve_fpe_1d(-1.0, 0.5, g).P_esc;
  EXPECT_LT(std::abs(a - b), 1e-3);
}

TEST(Fpe1d, PureDiffusionSurvival) {
  FpeGrid1D g;
  g.x_bd = 2.0;
  g.nx = 401;
  g.x0 = 0.0;
  g.var0 = 0.05;
  g.nt = 400;
  for (double t1 : {0.1, 0.5, 1.0}) {
    FpeResult r = solve_fpe_1d_drift([](double, double) { return 0.0; }, 0.0, t1, g);
    EXPECT_NEAR(r.mass.back(), diffusion_survival(2.0, 0.05, t1), 2e-4) << t1;
  }
}

TEST(Fpe1d, OrnsteinUhlenbeckStaysSymmetric) {
  FpeGrid1D g;
  g.x_bd = 6.0;
  g.nx = 301;
  g.x0 = 0.0;
  g.var0 = 0.3;
  g.nt = 200;
  FpeResult r = solve_fpe_1d_drift([](double x, double) { return -x; }, 0.0, 2.0, g);
  const auto& u = r.final_density;
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i], u[u.size() - 1 - i], 1e-10);
  // Relaxes towards the stationary variance of one.
  double m2 = 0.0, dx = r.x[1] - r.x[0];
  for (std::size_t i = 0; i < u.size(); ++i) m2 += r.x[i] * r.x[i] * u[i] * dx;
  EXPECT_NEAR(m2 / r.mass.back(), 1.0 - 0.7 * std::exp(-4.0), 5e-3);
}

TEST(Fpe1d, RejectsBadGrid) {
  FpeGrid1D g;
  g.nx = 3;
  g.x_bd = -1.0;
  EXPECT_THROW(solve_fpe_1d(0.0, 1.0, g), TippingError);
  EXPECT_THROW(solve_fpe_1d(0.0, -1.0), TippingError);
}

TEST(Fpe1d, RegimeLimitsAlongRays) {
  // Rays (p0, p2) = (s a, s^2 b) through the origin of the (q1, q2) plane.
  // Safe ray (a < sqrt(b)): P_esc falls from near 1 at small s towards 0.
  double prev = 1.0;
  std::vector<double> P;
  for (double s : {0.1, 0.3, 1.0, 2.0, 3.0}) {
    P.push_back(solve_fpe_1d(0.5 * s, s * s).P_esc);
    EXPECT_LT(P.back(), prev) << s;
    prev = P.back();
  }
  EXPECT_GT(P.front(), 0.9);
  EXPECT_LT(P.back(), 0.2 * P.front());
  // Tipping ray: P_esc approaches 1 at both ends.
  EXPECT_GT(solve_fpe_1d(1.5 * 0.1, 0.01).P_esc, 0.9);
  EXPECT_GT(solve_fpe_1d(1.5 * 4.0, 16.0).P_esc, 0.9);
}
