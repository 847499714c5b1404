#pragma once

#include "tipping/dynsys.hpp"

namespace tipping {

// Canonical SDE dx = [p0 - p2 t^2 + x^2] dt + sqrt(2) dW, together with the
// original-scale tuple it came from.
struct NormalFormParams {
  double p0 = 0.0;
  double p2 = 1.0;
  double R0 = 0.0;
  double R2 = 1.0;
  double D = 1.0;
  double a0 = 1.0;
  double kappa = 1.0;
};

NormalFormParams rescale_to_canonical(double R0, double R2, double D, double a0, double kappa);
// Inverse map (p0, p2) -> (R0, R2) at the given D, a0, kappa.
NormalFormParams canonical_to_original(double p0, double p2, double D, double a0, double kappa);

// Projected noise variance w0^T Delta w0, Delta = Sigma Sigma^T.
double projected_noise(const Vec& w0, const Mat& Delta);

// Affine map of the projected scalar system dx = [a0 (q - q_b) + a0 kappa x^2] dt
// + sqrt(2D) dW onto canonical units: p = forcing_scale * (q - q_b), s = time_scale * t,
// x_canonical = state_scale * x.
struct CanonicalScaling {
  double forcing_scale = 1.0;
  double time_scale = 1.0;
  double state_scale = 1.0;
};
CanonicalScaling canonical_scaling(double a0, double kappa, double D);

struct QCoords {
  double q1 = 0.0;
  double q2 = 0.0;
};
// (q1, q2) = (sqrt(p2), p0 - sqrt(p2)); q2 = 0 is the deterministic boundary.
QCoords q_transform(double p0, double p2);
// Returns (p0, p2) from (q1, q2), q1 > 0.
std::pair<double, double> q_inverse(double q1, double q2);

}  // namespace tipping
