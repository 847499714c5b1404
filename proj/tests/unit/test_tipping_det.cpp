#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tipping/error.hpp"
#include "tipping/monsoon.hpp"
#include "tipping/monte_carlo.hpp"
#include "tipping/tipping_det.hpp"

using namespace tipping;

namespace {

DynamicalSystem normal_form(double cubic = 0.0) {
  DynamicalSystem s;
  s.dim = 1;
  s.rhs = [cubic](const Vec& y, double q) {
    Vec f(1);
    f[0] = q + y[0] * y[0] + cubic * y[0] * y[0] * y[0];
    return f;
  };
  s.w = Vec::Ones(1);
  return s;
}

Box wide_box() { return Box{Vec::Constant(1, -100.0), Vec::Constant(1, 100.0)}; }

TippingVerdict simulate(double R0, double R2, double eps, double cubic = 0.0) {
  ForcingProfile f(ParabolicForcing{R0, R2, eps, 0.0});
  double q0 = f.value(f.natural_span().first);
  return classify_by_simulation(normal_form(cubic), f, wide_box(),
                                Vec::Constant(1, -std::sqrt(-q0)));
}

}  // namespace

TEST(InverseSquare, MarginAndCriticalValues) {
  TippingVerdict v = criterion_inverse_square(4.0, 0.25, 3.0);
  EXPECT_DOUBLE_EQ(v.margin, 16.0 - 4.0 * 0.25 * 9.0);
  EXPECT_FALSE(v.tipped);
  EXPECT_EQ(v.method, VerdictMethod::inverse_square);
  EXPECT_TRUE(criterion_inverse_square(4.0, 1.0, 3.0).tipped);
  EXPECT_DOUBLE_EQ(criterion_inverse_square(4.0, -1.0, 3.0).margin, 16.0);
  EXPECT_NEAR(critical_exceedance_time(4.0, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(critical_amplitude(4.0, 2.0), 1.0, 1e-15);
  EXPECT_THROW(criterion_inverse_square(-1.0, 0.1, 1.0), TippingError);
}

TEST(InverseSquare, QuotedMonsoonExamples) {
  // Roughly 30 years at R = 0.005 and 15 years at R = 0.02.
  EXPECT_NEAR(10.0 * critical_exceedance_time(318.36, 0.005), 30.0, 2.0);
  EXPECT_NEAR(10.0 * critical_exceedance_time(318.36, 0.02), 15.0, 1.5);
  EXPECT_FALSE(criterion_inverse_square(318.36, 0.005, 3.0).tipped);
}

TEST(InverseSquare, MonotoneInAmplitudeAndTime) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> R(0.0, 0.05), t(0.1, 5.0);
  for (int k = 0; k < 2000; ++k) {
    double r = R(rng), te = t(rng), dr = 0.001, dt = 0.05;
    auto a = criterion_inverse_square(318.36, r, te);
    EXPECT_GE(a.margin, criterion_inverse_square(318.36, r + dr, te).margin);
    EXPECT_GE(a.margin, criterion_inverse_square(318.36, r, te + dt).margin);
    if (a.tipped) {
      EXPECT_TRUE(criterion_inverse_square(318.36, r + dr, te).tipped);
      EXPECT_TRUE(criterion_inverse_square(318.36, r, te + dt).tipped);
    }
  }
}

TEST(Acceleration, AgreesWithInverseSquareOnParabolas) {
  // q = eps R0 - eps^2 R2 t^2: both criteria reduce to R0 <= sqrt(R2) for d_b = 4.
  for (double R0 : {0.2, 0.8, 0.99, 1.01, 1.5})
    for (double R2 : {0.5, 1.0, 2.0}) {
      double eps = 0.01;
      ParabolicForcing p{R0, R2, eps, 0.0};
      ForcingProfile f(p);
      auto acc = criterion_acceleration(f.peak_value(), f.second_derivative(0.0), 0.0, 4.0);
      auto inv = criterion_inverse_square(4.0, eps * R0, parabolic_exceedance_time(p));
      EXPECT_EQ(acc.tipped, inv.tipped) << R0 << " " << R2;
      EXPECT_EQ(acc.tipped, R0 > std::sqrt(R2));
    }
  EXPECT_THROW(criterion_acceleration(0.1, 0.5, 0.0, 4.0), TippingError);
}

TEST(Simulation, NormalFormVerdictMatchesCriterionOutsideBand) {
  // At eps = 1e-3 the simulated verdict equals the criterion verdict for all
  // (R0, R2) with |R0 / sqrt(R2) - 1| > 0.01.
  const double eps = 1e-3;
  int checked = 0;
  for (double R2 : {0.25, 1.0, 4.0})
    for (double ratio : {-0.5, 0.3, 0.8, 0.95, 0.985, 1.015, 1.05, 1.2, 2.0}) {
      double R0 = ratio * std::sqrt(R2);
      ParabolicForcing p{R0, R2, eps, 0.0};
      bool crit = R0 > 0.0 && criterion_inverse_square(4.0, eps * R0, parabolic_exceedance_time(p)).tipped;
      EXPECT_EQ(simulate(R0, R2, eps).tipped, crit) << "R0=" << R0 << " R2=" << R2;
      ++checked;
    }
  EXPECT_EQ(checked, 27);
}

TEST(Simulation, PerturbedNormalFormConvergesToCriterion) {
  // With a cubic term the boundary shifts by O(eps); away from a band it
  // still matches the quadratic criterion.
  const double eps = 1e-3;
  for (double ratio : {0.7, 0.9, 1.1, 1.3}) {
    bool crit = ratio > 1.0;
    EXPECT_EQ(simulate(ratio, 1.0, eps, 0.5).tipped, crit) << ratio;
  }
}

TEST(Simulation, MonsoonScenariosAtHalfSpeed) {
  monsoon::MonsoonParams p = monsoon::MonsoonParams::reference();
  FoldPoint f = monsoon::fold(p);
  DynamicalSystem s = monsoon::make_system(p);
  auto run = [&](double R) {
    return classify_by_simulation(s, monsoon::scenario(R, 0.5, f.q_b).profile(),
                                  monsoon::escape_box(), monsoon::default_guess());
  };
  EXPECT_FALSE(run(0.01).tipped);
  EXPECT_FALSE(run(0.02).tipped);
  EXPECT_TRUE(run(0.03).tipped);
}

TEST(CriticalCurve, ParabolicFamilyHasExactBoundary) {
  // q = R - (4R/t_e^2) t^2 with y' = q + y^2 tips iff R t_e^2 > 4 exactly.
  ForcingFamily family = [](double R, double te) {
    return ForcingProfile(ParabolicForcing{R, 4.0 * R / (te * te), 1.0, 0.0});
  };
  CriticalCurveOptions o;
  o.R_tol = 1e-6;
  auto pts = critical_curve(normal_form(), family, {1.0, 2.0, 4.0}, 4.0, wide_box(),
                            Vec::Constant(1, -1.0), o);
  for (const auto& c : pts) {
    ASSERT_TRUE(c.ok) << c.error;
    EXPECT_NEAR(c.R_crit, 4.0 / (c.t_e * c.t_e), 2e-5 + 1e-3 * c.R_crit);
    EXPECT_NEAR(c.R_asymptotic, 4.0 / (c.t_e * c.t_e), 1e-14);
  }
}

TEST(CriticalCurve, BracketFailureIsReported) {
  // A system that never tips cannot bracket a critical amplitude.
  DynamicalSystem s;
  s.dim = 1;
  s.rhs = [](const Vec& y, double q) { return Vec(Vec::Constant(1, std::tanh(q) - 10.0 - y[0])); };
  s.w = Vec::Ones(1);
  ForcingFamily family = [](double R, double te) {
    return ForcingProfile(ParabolicForcing{R, 4.0 * R / (te * te), 1.0, 0.0});
  };
  auto pts = critical_curve(s, family, {1.0}, 4.0, wide_box(), Vec::Constant(1, -10.0));
  EXPECT_FALSE(pts[0].ok);
  EXPECT_EQ(pts[0].error, "bracket-failure");
}

TEST(AutocorrelationEstimate, RecoversOrnsteinUhlenbeckRate) {
  // AR(1) with a = exp(lambda dt): d = lambda^2 / (q_b - q_c).
  const double lambda = -2.0, dt = 0.01, qb = 1.0, qc = 0.5;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(400000);
  double a = std::exp(lambda * dt);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = a * x[i - 1] + n(rng);
  DbEstimate e = estimate_db_from_series(x, dt, qc, qb);
  EXPECT_NEAR(e.autocorrelation, a, 3e-3);
  // (1 - a)/dt approximates -lambda to first order in dt.
  double expected = std::pow((1.0 - a) / dt, 2) / (qb - qc);
  EXPECT_NEAR(e.d, expected, 0.1 * expected);
  EXPECT_THROW(estimate_db_from_series({1.0, 1.0, 1.0}, dt, qc, qb), TippingError);
}

TEST(AutocorrelationEstimate, DimensionlessCheckMatchesCriterion) {
  double a = 0.96, dt = 0.01, qc = 0.5, qb = 0.52, qpeak = 0.53, te = 2.0;
  double d = std::pow((1.0 - a) / dt, 2) / (qb - qc);
  EXPECT_EQ(dimensionless_check(a, qc, qb, qpeak, te, dt).tipped,
            criterion_inverse_square(d, qpeak - qb, te).tipped);
}

TEST(AutocorrelationEstimate, OuRateWithinFivePercent) {
  AutonomousDrift drift = [](const double* y, double* f) { f[0] = -2.0 * y[0]; };
  // dx = -2x dt + dW has noise variance 1/2 in the sqrt(2 D) convention.
  auto x = sample_output_series(drift, Vec::Ones(1), Vec::Constant(1, 0.5), Vec::Zero(1), 0.01,
                                100000, 10, 17);
  DbEstimate e = estimate_db_from_series(x, 0.01, 0.0, 1.0);
  EXPECT_NEAR(e.autocorrelation, 0.98, 0.005);
  EXPECT_NEAR(e.lambda, -2.0, 0.1);
}

TEST(AutocorrelationEstimate, MonsoonNearTheFold) {
  monsoon::MonsoonParams p = monsoon::MonsoonParams::reference();
  FoldPoint f = monsoon::fold(p);
  Vec D(2);
  D << 1e-4, 3e-2;
  auto series = sample_monsoon_series(p, 0.47, f.w0, D, 2e-3, 2000000, 4, 23);
  DbEstimate e = estimate_db_from_series(series, 2e-3, 0.47, f.q_b);
  EXPECT_NEAR(e.d, 318.36, 0.25 * 318.36);
}
