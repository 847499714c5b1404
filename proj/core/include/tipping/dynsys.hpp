#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tipping/forcing.hpp"

namespace tipping {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rhs = std::function<Vec(const Vec& y, double q)>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct DynamicalSystem {
  int dim = 1;
  Rhs rhs;
  Vec w;  // output weights, y_o = w^T y

  Vec operator()(const Vec& y, double q) const { return rhs(y, q); }
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  Mat states;  // rows are states at `times`
  std::vector<double> forcing_values;
  bool escaped = false;
  double escape_time = kNaN;
};

// Axis-aligned box used as an escape-abort region.
struct Box {
  Vec lo;
  Vec hi;
  bool contains(const Vec& y) const;
};

struct IntegrateOptions {
  std::optional<Box> box;
  double initial_step = 0.0;  // 0: pick from the span
  double min_step_rel = 1e-12;
  std::size_t max_steps = 20'000'000;
  bool record = true;  // false keeps only the endpoints
};

// Adaptive Dormand-Prince 5(4); local error per step <= tol (absolute and relative).
Trajectory integrate(const DynamicalSystem& sys, const Vec& y0, double t0, double t1,
                     const ForcingProfile& forcing, double tol, const IntegrateOptions& opts = {});

// Central-difference derivatives, step max(1e-6, 1e-6*||y||_inf).
double fd_step(const Vec& y);
Mat jacobian(const DynamicalSystem& sys, const Vec& y, double q);
Vec parameter_derivative(const DynamicalSystem& sys, const Vec& y, double q);
// f_yy[v, v] by a second central difference along v.
Vec second_directional(const DynamicalSystem& sys, const Vec& y, double q, const Vec& v);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
};

Vec find_equilibrium(const DynamicalSystem& sys, double q, const Vec& guess,
                     const NewtonOptions& opts = {});

struct LeadingEigenvalue {
  double value = kNaN;  // real part of the eigenvalue with largest real part
  double imag = 0.0;
  bool complex_pair = false;
};

LeadingEigenvalue leading_eigenvalue(const DynamicalSystem& sys, const Vec& y, double q);

struct SignFlips {
  bool q_flipped = false;
  bool w_flipped = false;
};

struct FoldPoint {
  Vec y_b;
  double q_b = kNaN;
  Vec v0;
  Vec w0;
  Vec w;  // output weights after any sign flip
  double a0 = kNaN;
  double kappa = kNaN;
  double d_b = kNaN;        // 4 a0^2 kappa
  double d_b_limit = kNaN;  // extrapolated lambda^2 / |q - q_b|
  double lambda_at_fold = kNaN;
  SignFlips flips;
  bool has_coefficients = false;

  // +1 if q increases towards the fold from the stable side, -1 if flipped.
  double orientation() const { return flips.q_flipped ? -1.0 : 1.0; }
};

struct FoldOptions {
  int march_steps = 40;
  int bisection_steps = 40;
  int augmented_iter = 30;
  double lambda_tol = 1e-6;
};

// Tracks the stable branch from q_start towards q_end and refines the fold
// with the augmented system {f = 0, J v = 0, c^T v = 1}.
FoldPoint locate_fold(const DynamicalSystem& sys, double q_start, double q_end, const Vec& guess,
                      const FoldOptions& opts = {});

// Fills a0, kappa and both d_b routes, applying the positive sign convention.
FoldPoint normal_form_coefficients(const DynamicalSystem& sys, FoldPoint fold);

// Stable-branch decay rate squared over distance to the fold at offset delta.
double db_ratio(const DynamicalSystem& sys, const FoldPoint& fold, double delta);

}  // namespace tipping
