#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tipping/dynsys.hpp"
#include "tipping/monsoon.hpp"
#include "tipping/normal_form.hpp"

namespace tipping {

// Deterministic orbit of x' = p(s) + x^2 that follows the attracting slow
// manifold from the start of the window. Cubic Hermite interpolation between
// accepted steps.
class XbarTrajectory {
 public:
  XbarTrajectory(std::vector<double> s, std::vector<double> x, std::vector<double> dx);

  double operator()(double s) const;
  double begin() const { return s_.front(); }
  double end() const { return s_.back(); }
  bool valid() const { return max_value_ < 0.0; }  // x(s) < 0 throughout
  double max_value() const { return max_value_; }
  double argmax() const { return argmax_; }
  const std::vector<double>& nodes() const { return s_; }
  const std::vector<double>& values() const { return x_; }

 private:
  std::vector<double> s_, x_, dx_;
  double max_value_ = 0.0;
  double argmax_ = 0.0;
};

using ScalarFn = std::function<double(double)>;

// Starts at x = -sqrt(-p(s0) + p'(s0) / (2 sqrt(-p(s0)))) and integrates to s1.
// Throws "no-connecting-orbit" on blow-up and "no-metastable-well" if p(s0) >= 0.
XbarTrajectory xbar_trajectory_general(const ScalarFn& p, const ScalarFn& dp, double s0, double s1,
                                       double tol = 1e-10);

// Canonical forcing p0 - p2 s^2 on [-T, T]; T = 0 picks sqrt((max(p0,0) + 100)/p2),
// so that sqrt(p2) T >= 10.
XbarTrajectory xbar_trajectory(double p0, double p2, double T = 0.0);

// Escape rate gamma1 of the frozen operator d_z^2 u - d_z[(z^2 + 2 xbar z) u] on
// [-half_width, half_width] with Dirichlet ends.
double gamma1(double xbar, double half_width = 8.0, int n = 801);

struct ModeFit {
  double c0 = 1.01;
  double c2 = 1.41;
  std::vector<double> sample_xbars;
  std::vector<double> sample_log_rates;  // -log gamma1
  std::vector<double> residuals;
  double max_residual = 0.0;

  double rate(double xbar) const;
};

// Least squares of -log gamma1 against {1, xbar^2}.
ModeFit fit_mode_coefficients(const std::vector<double>& xbars, double half_width = 8.0,
                              int n = 801);
// Evenly spaced samples on [lo, hi].
std::vector<double> fit_samples(double lo = -1.0, double hi = -0.1, int count = 10);
// Coefficients as quoted with the method, c0 = 1.01, c2 = 1.41.
ModeFit quoted_mode_fit();

// Escape rate as a function of xbar: quadratic fit or spline through exact gamma1.
class RateModel {
 public:
  enum class Kind { quadratic, tabulated };

  static RateModel quadratic(const ModeFit& fit);
  // Spline in -log gamma1 on xbar in [-3.5, -0.02]; built once and shared.
  static RateModel tabulated();

  double operator()(double xbar) const;
  Kind kind() const { return kind_; }

 private:
  struct Table;
  Kind kind_ = Kind::quadratic;
  ModeFit fit_;
  std::shared_ptr<const Table> table_;
};

struct ModeResult {
  double P = kNaN;
  double integral = kNaN;  // integrated rate
  double xbar_max = kNaN;
  bool valid = false;
};

// 1 - exp(-integral of rate(xbar(s)) ds); throws "mode-approx-invalid" if xbar
// reaches zero anywhere in the window.
ModeResult mode_approx_probability(const XbarTrajectory& xbar, const RateModel& rate);
ModeResult mode_approx_canonical(double p0, double p2, const RateModel& rate);

// Projected monsoon data: fold coefficients and projected noise variance.
struct MonsoonProjection {
  double a0 = kNaN;
  double kappa = kNaN;
  double D = kNaN;
  double A_b = kNaN;

  static MonsoonProjection from_fold(const FoldPoint& fold, const Mat& Delta);
};

// Orbit of the rescaled projected monsoon equation over [0, t_end].
XbarTrajectory xbar_monsoon(const monsoon::AlbedoForcing& forcing, const MonsoonProjection& proj);
ModeResult mode_approx_monsoon(const monsoon::AlbedoForcing& forcing, const MonsoonProjection& proj,
                               const RateModel& rate);

}  // namespace tipping
