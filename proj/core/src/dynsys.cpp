#include "tipping/dynsys.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "tipping/error.hpp"

namespace tipping {

void DynamicalSystem::validate() const {
  Violations v;
  v.check(dim >= 1, "dim must be >= 1");
  v.check(static_cast<bool>(rhs), "rhs must be set");
  v.check(w.size() == dim, "output weights must have length dim");
  v.check(w.size() == 0 || w.cwiseAbs().maxCoeff() > 0.0, "output weights must not be zero");
  v.throw_if_any("invalid-system");
}

bool Box::contains(const Vec& y) const {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!(y[i] >= lo[i] && y[i] <= hi[i])) return false;
  return true;
}

double fd_step(const Vec& y) {
  double n = y.size() ? y.cwiseAbs().maxCoeff() : 0.0;
  return std::max(1e-6, 1e-6 * n);
}

Mat jacobian(const DynamicalSystem& sys, const Vec& y, double q) {
  const double h = fd_step(y);
  Mat J(sys.dim, sys.dim);
  Vec yp = y, ym = y;
  for (int j = 0; j < sys.dim; ++j) {
    yp[j] = y[j] + h;
    ym[j] = y[j] - h;
    J.col(j) = (sys(yp, q) - sys(ym, q)) / (2.0 * h);
    yp[j] = ym[j] = y[j];
  }
  return J;
}

Vec parameter_derivative(const DynamicalSystem& sys, const Vec& y, double q) {
  const double h = std::max(1e-6, 1e-6 * std::abs(q));
  return (sys(y, q + h) - sys(y, q - h)) / (2.0 * h);
}

Vec second_directional(const DynamicalSystem& sys, const Vec& y, double q, const Vec& v) {
  double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  double h = 1e-4 * scale / v.cwiseAbs().maxCoeff();
  return (sys(y + h * v, q) - 2.0 * sys(y, q) + sys(y - h * v, q)) / (h * h);
}

Vec find_equilibrium(const DynamicalSystem& sys, double q, const Vec& guess,
                     const NewtonOptions& opts) {
  Vec y = guess;
  Vec f = sys(y, q);
  for (int it = 0; it < opts.max_iter; ++it) {
    double fn = f.cwiseAbs().maxCoeff();
    if (!std::isfinite(fn)) break;
    if (fn <= opts.tol) return y;
    Mat J = jacobian(sys, y, q);
    Eigen::FullPivLU<Mat> lu(J);
    if (!lu.isInvertible())
      fail_numerical("jacobian-singular", "singular Jacobian at q = " + std::to_string(q));
    Vec dy = lu.solve(-f);
    // Backtracking keeps Newton from jumping to the other branch near the fold.
    double lambda = 1.0;
    Vec ytry = y + dy;
    Vec ftry = sys(ytry, q);
    while (!(ftry.cwiseAbs().maxCoeff() < fn) && lambda > 1.0 / 64.0) {
      lambda *= 0.5;
      ytry = y + lambda * dy;
      ftry = sys(ytry, q);
    }
    double step = (ytry - y).cwiseAbs().maxCoeff();
    y = ytry;
    f = ftry;
    double ftry_n = f.cwiseAbs().maxCoeff();
    // Roundoff floor: the step no longer moves y and the residual is already tiny.
    if (step <= 1e-14 * std::max(1.0, y.cwiseAbs().maxCoeff()) && ftry_n <= 1e3 * opts.tol)
      return y;
  }
  if (f.allFinite() && f.cwiseAbs().maxCoeff() <= opts.tol) return y;
  fail_numerical("newton-diverged",
                 "no equilibrium within " + std::to_string(opts.max_iter) +
                     " Newton iterations at q = " + std::to_string(q));
}

LeadingEigenvalue leading_eigenvalue(const DynamicalSystem& sys, const Vec& y, double q) {
  Mat J = jacobian(sys, y, q);
  Eigen::EigenSolver<Mat> es(J, false);
  auto ev = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (ev[i].real() > ev[best].real()) best = i;
  LeadingEigenvalue out;
  out.value = ev[best].real();
  out.imag = ev[best].imag();
  out.complex_pair = std::abs(out.imag) > 1e-12 * std::max(1.0, std::abs(out.value));
  return out;
}

namespace {

bool stable_equilibrium(const DynamicalSystem& sys, double q, const Vec& guess, Vec& out) {
  try {
    Vec y = find_equilibrium(sys, q, guess);
    if (leading_eigenvalue(sys, y, q).value >= 0.0) return false;
    out = y;
    return true;
  } catch (const TippingError&) {
    return false;
  }
}

// Right nullvector approximation: eigenvector of the eigenvalue nearest zero.
Vec near_null_vector(const Mat& J) {
  Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV().col(J.cols() - 1);
}

}  // namespace

FoldPoint locate_fold(const DynamicalSystem& sys, double q_start, double q_end, const Vec& guess,
                      const FoldOptions& opts) {
  sys.validate();
  Vec y_good;
  if (!stable_equilibrium(sys, q_start, guess, y_good))
    fail_validation("no-fold-in-bracket",
                    "no stable equilibrium at the bracket start q = " + std::to_string(q_start));

  // March along the stable branch until it is lost.
  double q_good = q_start, q_bad = kNaN;
  const double dq = (q_end - q_start) / opts.march_steps;
  for (int k = 1; k <= opts.march_steps; ++k) {
    double q = q_start + k * dq;
    Vec y;
    if (stable_equilibrium(sys, q, y_good, y)) {
      q_good = q;
      y_good = y;
    } else {
      q_bad = q;
      break;
    }
  }
  if (std::isnan(q_bad))
    fail_validation("no-fold-in-bracket", "stable branch persists across the whole bracket");

  for (int k = 0; k < opts.bisection_steps; ++k) {
    double q = 0.5 * (q_good + q_bad);
    Vec y;
    if (stable_equilibrium(sys, q, y_good, y)) {
      q_good = q;
      y_good = y;
    } else {
      q_bad = q;
    }
    if (std::abs(q_bad - q_good) <= 1e-14 * std::max(1.0, std::abs(q_good))) break;
  }

  // Augmented Newton on z = (y, q, v).
  const int n = sys.dim;
  Vec c = near_null_vector(jacobian(sys, y_good, q_good));
  Vec z(2 * n + 1);
  z.head(n) = y_good;
  z[n] = q_good;
  z.tail(n) = c;
  auto residual = [&](const Vec& zz) {
    Vec r(2 * n + 1);
    Vec yy = zz.head(n);
    double qq = zz[n];
    Vec vv = zz.tail(n);
    r.head(n) = sys(yy, qq);
    r.segment(n, n) = jacobian(sys, yy, qq) * vv;
    r[2 * n] = c.dot(vv) - 1.0;
    return r;
  };
  Vec r = residual(z);
  bool converged = false;
  for (int it = 0; it < opts.augmented_iter; ++it) {
    Mat A(2 * n + 1, 2 * n + 1);
    for (int j = 0; j < 2 * n + 1; ++j) {
      double h = 1e-5 * std::max(1.0, std::abs(z[j]));
      Vec zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      A.col(j) = (residual(zp) - residual(zm)) / (2.0 * h);
    }
    Vec dz = A.fullPivLu().solve(-r);
    if (!dz.allFinite()) break;
    z += dz;
    r = residual(z);
    double scale = std::max(1.0, z.head(n).cwiseAbs().maxCoeff());
    if (dz.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
      converged = true;
      break;
    }
  }
  if (!converged && !(r.allFinite() && r.cwiseAbs().maxCoeff() <= 1e-8))
    fail_numerical("newton-diverged", "augmented fold system did not converge");

  FoldPoint fp;
  fp.y_b = z.head(n);
  fp.q_b = z[n];
  fp.w = sys.w;

  Mat J = jacobian(sys, fp.y_b, fp.q_b);
  Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec v0 = svd.matrixV().col(n - 1);
  Vec w0 = svd.matrixU().col(n - 1);
  double wv = w0.dot(v0);
  if (std::abs(wv) < 1e-12) fail_numerical("degenerate-fold", "left and right nullvectors are orthogonal");
  w0 /= wv;
  double s = sys.w.dot(v0);
  if (std::abs(s) < 1e-12)
    fail_validation("output-not-observable", "output weights are orthogonal to the nullvector");
  v0 /= s;
  w0 *= s;
  fp.v0 = v0;
  fp.w0 = w0;

  // The critical eigenvalue is the one closest to zero; all others must be stable.
  Eigen::EigenSolver<Mat> es(J, false);
  auto ev = es.eigenvalues();
  Eigen::Index crit = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (std::abs(ev[i]) < std::abs(ev[crit])) crit = i;
  fp.lambda_at_fold = ev[crit].real();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (i != crit && ev[i].real() >= 0.0)
      fail_numerical("s2-violated", "a non-critical eigenvalue at the fold is not stable");
  double jscale = std::max(1.0, J.cwiseAbs().maxCoeff());
  if (std::abs(fp.lambda_at_fold) > opts.lambda_tol * jscale)
    fail_numerical("newton-diverged", "critical eigenvalue at the located fold is not zero");
  return fp;
}

double db_ratio(const DynamicalSystem& sys, const FoldPoint& fold, double delta) {
  double q = fold.q_b - fold.orientation() * delta;
  double x = std::sqrt(delta / std::abs(fold.kappa));
  double best = kNaN;
  for (double sgn : {-1.0, 1.0}) {
    Vec y;
    if (stable_equilibrium(sys, q, fold.y_b + sgn * x * fold.v0, y)) {
      double lam = leading_eigenvalue(sys, y, q).value;
      best = lam * lam / delta;
      break;
    }
  }
  if (std::isnan(best))
    fail_numerical("newton-diverged", "no stable equilibrium next to the fold at offset " +
                                          std::to_string(delta));
  return best;
}

FoldPoint normal_form_coefficients(const DynamicalSystem& sys, FoldPoint fold) {
  if (fold.v0.size() != sys.dim || fold.w0.size() != sys.dim)
    fail_validation("invalid-fold", "fold has no nullvectors");
  double a0 = fold.w0.dot(parameter_derivative(sys, fold.y_b, fold.q_b));
  if (std::abs(a0) < 1e-8) fail_numerical("degenerate-fold", "a0 vanishes (no transversal crossing)");
  double kappa = fold.w0.dot(second_directional(sys, fold.y_b, fold.q_b, fold.v0)) / (2.0 * a0);
  if (std::abs(kappa) < 1e-8) fail_numerical("degenerate-fold", "kappa vanishes (no quadratic tangency)");

  if (kappa < 0.0) {
    fold.flips.q_flipped = true;
    a0 = -a0;
    kappa = -kappa;
  }
  if (a0 < 0.0) {
    fold.flips.w_flipped = true;
    a0 = -a0;
    fold.v0 = -fold.v0;
    fold.w0 = -fold.w0;
    fold.w = -fold.w;
  }
  fold.a0 = a0;
  fold.kappa = kappa;
  fold.d_b = 4.0 * a0 * a0 * kappa;

  // d(delta) = d_b + A sqrt(delta) + B delta, fitted exactly through three offsets.
  const double base = 1e-3 * std::max(std::abs(fold.q_b), 1.0);
  const double deltas[3] = {base, base / 2.0, base / 4.0};
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    M(i, 0) = 1.0;
    M(i, 1) = std::sqrt(deltas[i]);
    M(i, 2) = deltas[i];
    rhs[i] = db_ratio(sys, fold, deltas[i]);
  }
  fold.d_b_limit = M.fullPivLu().solve(rhs)[0];
  fold.has_coefficients = true;
  return fold;
}

}  // namespace tipping
