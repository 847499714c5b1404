#include "tipping/normal_form.hpp"

#include <cmath>

#include "tipping/error.hpp"

namespace tipping {

namespace {
void check_scaling(double D, double a0, double kappa) {
  Violations v;
  v.check(D > 0.0, "D must be positive");
  v.check(a0 > 0.0, "a0 must be positive");
  v.check(kappa > 0.0, "kappa must be positive");
  v.throw_if_any("invalid-scaling");
}
}  // namespace

NormalFormParams rescale_to_canonical(double R0, double R2, double D, double a0, double kappa) {
  check_scaling(D, a0, kappa);
  if (!(R2 > 0.0)) fail_validation("invalid-scaling", "R2 must be positive");
  NormalFormParams n{0.0, 0.0, R0, R2, D, a0, kappa};
  n.p0 = std::cbrt(a0 * a0) * R0 / (std::cbrt(D * D) * std::cbrt(kappa));
  n.p2 = R2 / (std::cbrt(D * D * D * D) * std::cbrt(kappa * kappa * kappa * kappa * kappa) *
               std::cbrt(a0 * a0));
  return n;
}

NormalFormParams canonical_to_original(double p0, double p2, double D, double a0, double kappa) {
  check_scaling(D, a0, kappa);
  if (!(p2 > 0.0)) fail_validation("invalid-scaling", "p2 must be positive");
  NormalFormParams n{p0, p2, 0.0, 0.0, D, a0, kappa};
  n.R0 = p0 * std::cbrt(D * D) * std::cbrt(kappa) / std::cbrt(a0 * a0);
  n.R2 = p2 * std::cbrt(D * D * D * D) * std::cbrt(kappa * kappa * kappa * kappa * kappa) *
         std::cbrt(a0 * a0);
  return n;
}

double projected_noise(const Vec& w0, const Mat& Delta) {
  if (Delta.rows() != w0.size() || Delta.cols() != w0.size())
    fail_validation("invalid-scaling", "noise matrix does not match state dimension");
  return w0.dot(Delta * w0);
}

CanonicalScaling canonical_scaling(double a0, double kappa, double D) {
  check_scaling(D, a0, kappa);
  // x_f = a0 kappa; X = (x_f/D)^{1/3} x and s = (x_f^2 D)^{1/3} t give unit noise.
  double xf = a0 * kappa;
  CanonicalScaling c;
  c.state_scale = std::cbrt(xf / D);
  c.time_scale = std::cbrt(xf * xf * D);
  c.forcing_scale = a0 / std::cbrt(xf) / std::cbrt(D * D);
  return c;
}

QCoords q_transform(double p0, double p2) {
  if (!(p2 >= 0.0)) fail_validation("invalid-scaling", "p2 must be nonnegative");
  double r = std::sqrt(p2);
  return {r, p0 - r};
}

std::pair<double, double> q_inverse(double q1, double q2) {
  if (!(q1 > 0.0)) fail_validation("invalid-scaling", "q1 must be positive");
  return {q2 + q1, q1 * q1};
}

}  // namespace tipping
