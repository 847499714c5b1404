#include <gtest/gtest.h>

#include <cmath>

#include "tipping/error.hpp"
#include "tipping/fpe1d.hpp"
#include "tipping/monte_carlo.hpp"

using namespace tipping;

namespace {

SdeSpec drift_only(double v) {
  SdeSpec s;
  s.drift = [v](double, const double*, double* f) { f[0] = v; };
  s.noise_variance = {0.0};
  s.lo = {-10.0};
  s.hi = {0.5};
  s.t0 = 0.0;
  s.t1 = 1.0;
  s.initial = [](std::mt19937_64&, double* y) { y[0] = 0.0; };
  return s;
}

// Survival of Brownian motion with D = 1 started at 0 between absorbing walls at +-L.
double survival(double L, double t) {
  const double pi = std::acos(-1.0);
  double s = 0.0;
  for (int k = 0; k < 100; ++k) {
    double m = 2 * k + 1;
    s += (k % 2 ? -1.0 : 1.0) / m * std::exp(-m * m * pi * pi * t / (4 * L * L));
  }
  return 4.0 / pi * s;
}

}  // namespace

TEST(MonteCarlo, DeterministicLimits) {
  McOptions o;
  o.n_paths = 1000;
  o.dt = 1e-2;
  EXPECT_DOUBLE_EQ(monte_carlo_escape(drift_only(1.0), o).P, 1.0);
  EXPECT_DOUBLE_EQ(monte_carlo_escape(drift_only(-1.0), o).P, 0.0);
}

TEST(MonteCarlo, SameSeedSameResultAcrossWorkers) {
  SdeSpec s = canonical_sde(0.0, 1.0);
  McOptions o;
  o.n_paths = 3000;
  o.dt = 2e-3;
  o.seed = 99;
  o.workers = 1;
  McResult a = monte_carlo_escape(s, o);
  o.workers = 3;
  McResult b = monte_carlo_escape(s, o);
  EXPECT_EQ(a.absorbed, b.absorbed);
  EXPECT_DOUBLE_EQ(a.P, b.P);
  o.seed = 100;
  EXPECT_NE(monte_carlo_escape(s, o).absorbed, a.absorbed);
}

TEST(MonteCarlo, BrownianSurvivalOracle) {
  SdeSpec s;
  s.drift = [](double, const double*, double* f) { f[0] = 0.0; };
  s.noise_variance = {1.0};
  s.lo = {-1.0};
  s.hi = {1.0};
  s.t1 = 0.3;
  s.initial = [](std::mt19937_64&, double* y) { y[0] = 0.0; };
  McOptions o;
  o.n_paths = 20000;
  o.dt = 1e-4;
  McResult r = monte_carlo_escape(s, o);
  double exact = 1.0 - survival(1.0, 0.3);
  // Discrete monitoring misses crossings between steps; allow that bias on top of 3 SE.
  double bias = 0.6 * std::sqrt(2.0 * o.dt);
  EXPECT_LE(r.P, exact + 3 * r.se);
  EXPECT_GE(r.P, exact - 3 * r.se - bias);
}

TEST(MonteCarlo, AgreesWithFpeOnCanonicalProblem) {
  McOptions o;
  o.n_paths = 10000;
  o.dt = 1e-3;
  McResult r = monte_carlo_escape(canonical_sde(0.0, 1.0), o);
  double P = solve_fpe_1d(0.0, 1.0).P_esc;
  EXPECT_LE(std::abs(r.P - P), 3 * r.se + 0.01);
  EXPECT_NEAR(r.se, std::sqrt(r.P * (1 - r.P) / r.n_paths), 1e-12);
}

TEST(MonteCarlo, RejectsBadSpec) {
  SdeSpec s = drift_only(1.0);
  s.noise_variance = {-1.0};
  EXPECT_THROW(monte_carlo_escape(s), TippingError);
  McOptions o;
  o.n_paths = 0;
  EXPECT_THROW(monte_carlo_escape(drift_only(1.0), o), TippingError);
}

TEST(MonteCarlo, StationarySeriesHasOuAutocorrelation) {
  AutonomousDrift drift = [](const double* y, double* f) { f[0] = -2.0 * y[0]; };
  auto x = sample_output_series(drift, Vec::Ones(1), Vec::Ones(1), Vec::Zero(1), 0.05, 40000, 20, 5);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    num += x[i] * x[i + 1];
    den += x[i] * x[i];
  }
  EXPECT_NEAR(num / den, std::exp(-0.1), 0.01);
}
