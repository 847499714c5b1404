#pragma once

#include <cmath>
#include <vector>

namespace tipping::detail {

// Bernoulli function z / (e^z - 1), the Scharfetter-Gummel weight.
inline double bernoulli(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - 0.5 * z + z * z / 12.0;
  if (z > 700.0) return z * std::exp(-z);
  return z / std::expm1(z);
}

// Tridiagonal matrix with rows i: lo[i] x[i-1] + di[i] x[i] + up[i] x[i+1].
struct Tridiag {
  std::vector<double> lo, di, up;

  explicit Tridiag(std::size_t n = 0) : lo(n, 0.0), di(n, 0.0), up(n, 0.0) {}
  std::size_t size() const { return di.size(); }

  // y = (I + c A) x
  void apply_shifted(double c, const double* x, double* y) const {
    const std::size_t n = di.size();
    for (std::size_t i = 0; i < n; ++i) {
      double v = x[i] + c * di[i] * x[i];
      if (i > 0) v += c * lo[i] * x[i - 1];
      if (i + 1 < n) v += c * up[i] * x[i + 1];
      y[i] = v;
    }
  }

  // Solves (I - c A) x = rhs in place (Thomas algorithm); work needs size n.
  void solve_shifted(double c, double* rhs, std::vector<double>& work) const {
    const std::size_t n = di.size();
    work.resize(n);
    double b = 1.0 - c * di[0];
    rhs[0] /= b;
    for (std::size_t i = 1; i < n; ++i) {
      work[i] = -c * up[i - 1] / b;
      b = 1.0 - c * di[i] + c * lo[i] * work[i];
      rhs[i] = (rhs[i] + c * lo[i] * rhs[i - 1]) / b;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= work[i + 1] * rhs[i + 1];
  }
};

// Scharfetter-Gummel discretization of d_t u = D u_xx - (b u)_x on the interior
// of a uniform grid with homogeneous Dirichlet ends. `face_drift[k]` is the
// drift at the face between nodes k and k+1 of the full grid (n_full - 1 faces);
// the result acts on the n_full - 2 interior nodes.
inline void sg_operator(const double* face_drift, std::size_t n_full, double dx, double D,
                        Tridiag& A) {
  const std::size_t n = n_full - 2;
  if (A.size() != n) A = Tridiag(n);
  const double s = D / (dx * dx);
  for (std::size_t k = 0; k < n; ++k) {
    // interior node k sits at full index k + 1, faces k (left) and k + 1 (right)
    double pl = face_drift[k] * dx / D;
    double pr = face_drift[k + 1] * dx / D;
    A.lo[k] = s * bernoulli(-pl);
    A.di[k] = -s * (bernoulli(-pr) + bernoulli(pl));
    A.up[k] = s * bernoulli(pr);
  }
}

}  // namespace tipping::detail
