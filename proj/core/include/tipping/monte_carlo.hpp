#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tipping/dynsys.hpp"
#include "tipping/monsoon.hpp"

namespace tipping {

// dy = f(t, y) dt + sqrt(2 D_i) dW_i with absorption outside [lo, hi].
struct SdeSpec {
  int dim = 1;
  std::function<void(double t, const double* y, double* f)> drift;
  std::vector<double> noise_variance;  // D_i per component
  std::vector<double> lo, hi;
  double t0 = 0.0;
  double t1 = 1.0;
  std::function<void(std::mt19937_64& rng, double* y)> initial;
  // Relaxation with the drift frozen at t0 before the window; paths absorbed
  // here are discarded rather than counted as escapes.
  double warmup = 0.0;

  void validate() const;
};

struct McOptions {
  std::size_t n_paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 20240601;
  std::size_t batch = 1000;
  unsigned workers = 0;
};

struct McResult {
  double P = 0.0;
  double se = 0.0;  // sqrt(P(1-P)/n)
  std::size_t n_paths = 0;   // paths that entered the window
  std::size_t absorbed = 0;
  std::size_t discarded = 0;  // absorbed during warm-up
};

// Euler-Maruyama; absorption is checked after each step. Each batch draws from
// its own stream seeded by (seed, batch index), so results do not depend on the
// worker count.
McResult monte_carlo_escape(const SdeSpec& sde, const McOptions& opts = {});

// Canonical SDE on [-T0, T0], absorbing at |x| = x_bd, Gaussian start N(x0, var0)
// conditioned on the domain. T0 <= 0 uses the FPE default.
SdeSpec canonical_sde(double p0, double p2, double T0 = 0.0, double x_bd = 8.0, double x0 = -4.0,
                      double var0 = 1.0);

// Two-dimensional monsoon SDE with noise variances (D1, D2) over [0, t_end],
// absorbing on the validity box, started at the stable state for A(0).
SdeSpec monsoon_sde(const monsoon::MonsoonParams& p, const monsoon::AlbedoForcing& forcing,
                    double D1 = 0.01, double D2 = 3.0, double warmup = 3.0);

using AutonomousDrift = std::function<void(const double* y, double* f)>;

// Stationary output series w^T y under additive noise Delta = diag(D), sampled
// every dt_sample with `substeps` Euler-Maruyama steps in between.
std::vector<double> sample_output_series(const AutonomousDrift& drift, const Vec& w, const Vec& D,
                                         const Vec& y_start, double dt_sample, std::size_t n,
                                         int substeps, std::uint64_t seed, double burn_in = 10.0);
std::vector<double> sample_output_series(const DynamicalSystem& sys, double q, const Vec& D,
                                         const Vec& y_start, double dt_sample, std::size_t n,
                                         int substeps, std::uint64_t seed, double burn_in = 10.0);
// Monsoon at fixed albedo, using the output weights `w`.
std::vector<double> sample_monsoon_series(const monsoon::MonsoonParams& p, double A_sys,
                                          const Vec& w, const Vec& D, double dt_sample,
                                          std::size_t n, int substeps, std::uint64_t seed);

}  // namespace tipping
