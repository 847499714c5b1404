#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tipping/dynsys.hpp"
#include "tipping/forcing.hpp"

namespace tipping {

enum class VerdictMethod { inverse_square, acceleration, simulation };
std::string to_string(VerdictMethod m);

struct TippingVerdict {
  bool tipped = false;
  // Criterion methods: signed safety margin (positive means safe).
  // Simulation: escape time if the box was left, else the final output distance
  // from the end-state equilibrium.
  double margin = 0.0;
  VerdictMethod method = VerdictMethod::inverse_square;
  bool integration_failed = false;
};

// Safe iff d_b * R * t_e^2 <= 16; margin = 16 - d_b R t_e^2 (16 for R <= 0).
TippingVerdict criterion_inverse_square(double d_b, double R, double t_e);
// Longest safe exceedance time at amplitude R, and largest safe amplitude at t_e.
double critical_exceedance_time(double d_b, double R);
double critical_amplitude(double d_b, double t_e);

// Safe iff q_peak < q_b + sqrt(-2 q_ddot / d_b); margin is the gap to that bound.
TippingVerdict criterion_acceleration(double q_peak, double q_ddot_at_peak, double q_b, double d_b);

struct Exceedance {
  double t_e = 0.0;
  bool exceeded = false;
  double t_enter = kNaN;
  double t_leave = kNaN;
};

// Time spent above threshold, from bisection of q(t) = threshold.
Exceedance exceedance_time(const ForcingProfile& forcing, double threshold);
// Closed form sqrt(4 R0 / (eps R2)) for crossings of q_b.
double parabolic_exceedance_time(const ParabolicForcing& f);

struct ClassifyOptions {
  double tol = 1e-8;
  double return_distance = 1e-3;  // in output units w^T y
  // After the window the forcing is held at its end value for this many
  // decay times of the end-state equilibrium before the distance is measured.
  double settle_rates = 30.0;
};

TippingVerdict classify_by_simulation(const DynamicalSystem& sys, const ForcingProfile& forcing,
                                      const Box& escape_box, const Vec& guess,
                                      const ClassifyOptions& opts = {});

// Forcing with exceedance amplitude R over the fold lasting t_e.
using ForcingFamily = std::function<ForcingProfile(double R, double t_e)>;

struct CriticalPoint {
  double t_e = 0.0;
  double R_crit = kNaN;
  double R_asymptotic = kNaN;
  bool ok = false;
  std::string error;  // "bracket-failure" when no safe/tipped pair was found
};

struct CriticalCurveOptions {
  double R_tol = 1e-5;
  double lo_factor = 0.25;  // initial bracket relative to 16/(d_b t_e^2)
  double hi_factor = 4.0;
  int widen_attempts = 3;
  ClassifyOptions classify;
  unsigned workers = 0;
};

std::vector<CriticalPoint> critical_curve(const DynamicalSystem& sys, const ForcingFamily& family,
                                          const std::vector<double>& t_e_grid, double d_b,
                                          const Box& escape_box, const Vec& guess,
                                          const CriticalCurveOptions& opts = {});

struct DbEstimate {
  double d = kNaN;
  double autocorrelation = kNaN;
  double lambda = kNaN;  // -(1 - a)/dt
};

// Lag-1 autocorrelation estimate (1 - a)^2 / (dt^2 (q_b - q_c)).
DbEstimate estimate_db_from_series(const std::vector<double>& series, double dt, double q_c,
                                   double q_b);
// Dimensionless check (1 - a)^2 / (q_b - q_c) * (q_peak - q_b) * N_e^2 <= 16, N_e = t_e/dt.
TippingVerdict dimensionless_check(double a, double q_c, double q_b, double q_peak, double t_e,
                                   double dt);

}  // namespace tipping
