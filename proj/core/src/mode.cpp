#include "tipping/mode.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "tipping/error.hpp"
#include "tridiag.hpp"

namespace tipping {

XbarTrajectory::XbarTrajectory(std::vector<double> s, std::vector<double> x, std::vector<double> dx)
    : s_(std::move(s)), x_(std::move(x)), dx_(std::move(dx)) {
  auto it = std::max_element(x_.begin(), x_.end());
  max_value_ = *it;
  argmax_ = s_[static_cast<std::size_t>(it - x_.begin())];
}

double XbarTrajectory::operator()(double s) const {
  if (s <= s_.front()) return x_.front();
  if (s >= s_.back()) return x_.back();
  std::size_t i = static_cast<std::size_t>(std::upper_bound(s_.begin(), s_.end(), s) - s_.begin()) - 1;
  double h = s_[i + 1] - s_[i];
  double t = (s - s_[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * x_[i] + (t3 - 2 * t2 + t) * h * dx_[i] +
         (-2 * t3 + 3 * t2) * x_[i + 1] + (t3 - t2) * h * dx_[i + 1];
}

XbarTrajectory xbar_trajectory_general(const ScalarFn& p, const ScalarFn& dp, double s0, double s1,
                                       double tol) {
  namespace odeint = boost::numeric::odeint;
  if (!(s1 > s0)) fail_validation("invalid-span", "xbar window must be nonempty");
  double p_start = p(s0);
  if (!(p_start < 0.0))
    fail_validation("no-metastable-well", "forcing at the window start has no stable state");
  double drift = dp(s0) / (2.0 * std::sqrt(-p_start));
  double x = -std::sqrt(std::max(-p_start + drift, 0.25 * -p_start));

  using State = std::array<double, 1>;
  auto rhs = [&](const State& y, State& dy, double s) { dy[0] = p(s) + y[0] * y[0]; };
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  State y{x};
  double s = s0, ds = std::min(1e-3, (s1 - s0) * 1e-3);
  std::vector<double> ss{s}, xs{x}, dxs{p(s) + x * x};
  std::size_t steps = 0;
  while (s < s1) {
    if (++steps > 5'000'000) fail_numerical("integration-failure", "xbar step budget exhausted");
    ds = std::min(ds, s1 - s);
    int rejects = 0;
    while (stepper.try_step(rhs, y, s, ds) == odeint::fail)
      if (++rejects > 200 || ds < 1e-14 * std::max(1.0, std::abs(s)))
        fail_numerical("no-connecting-orbit", "xbar blows up at s = " + std::to_string(s));
    if (s1 - s < 1e-13 * std::max(1.0, std::abs(s1))) s = s1;
    double bound = 1e3 * std::max(1.0, std::sqrt(std::abs(p(s))));
    if (!std::isfinite(y[0]) || y[0] > bound)
      fail_numerical("no-connecting-orbit", "xbar blows up at s = " + std::to_string(s));
    ss.push_back(s);
    xs.push_back(y[0]);
    dxs.push_back(p(s) + y[0] * y[0]);
  }
  return XbarTrajectory(std::move(ss), std::move(xs), std::move(dxs));
}

XbarTrajectory xbar_trajectory(double p0, double p2, double T) {
  if (!(p2 > 0.0)) fail_validation("invalid-scaling", "p2 must be positive");
  if (T <= 0.0) T = std::sqrt((std::max(p0, 0.0) + 100.0) / p2);
  auto p = [p0, p2](double s) { return p0 - p2 * s * s; };
  auto dp = [p2](double s) { return -2.0 * p2 * s; };
  return xbar_trajectory_general(p, dp, -T, T);
}

double gamma1(double xbar, double half_width, int n) {
  if (!(xbar < 0.0)) fail_validation("no-metastable-well", "gamma1 needs xbar < 0");
  if (n < 11 || !(half_width > 0.0)) fail_validation("invalid-grid", "gamma1 grid too small");
  const std::size_t nf = static_cast<std::size_t>(n);
  const double dx = 2.0 * half_width / static_cast<double>(nf - 1);
  std::vector<double> b(nf - 1);
  for (std::size_t k = 0; k + 1 < nf; ++k) {
    double z = -half_width + (static_cast<double>(k) + 0.5) * dx;
    b[k] = z * z + 2.0 * xbar * z;
  }
  detail::Tridiag A;
  detail::sg_operator(b.data(), nf, dx, 1.0, A);
  const std::size_t m = A.size();

  // M = -A is a column-diagonally-dominant M-matrix. Eliminating with the
  // column excess (GTH style) keeps every pivot a sum of positive terms, so
  // the tiny leak rate survives without cancellation.
  std::vector<double> excess(m, 0.0);
  const double s = 1.0 / (dx * dx);
  excess[0] = s * detail::bernoulli(b[0] * dx);           // flux into the left wall
  excess[m - 1] = s * detail::bernoulli(-b[nf - 2] * dx);  // flux into the right wall
  // M_{k,k-1} = -A.lo[k], M_{k,k+1} = -A.up[k]
  std::vector<double> piv(m), e(m);
  piv[0] = -A.di[0];
  e[0] = excess[0];
  for (std::size_t k = 1; k < m; ++k) {
    e[k] = excess[k] + A.up[k - 1] * e[k - 1] / piv[k - 1];
    double below = k + 1 < m ? A.lo[k + 1] : 0.0;
    piv[k] = below + e[k];
  }
  auto solve = [&](std::vector<double>& r) {
    for (std::size_t k = 1; k < m; ++k) r[k] += A.lo[k] / piv[k - 1] * r[k - 1];
    r[m - 1] /= piv[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) r[k] = (r[k] + A.up[k] * r[k + 1]) / piv[k];
  };

  std::vector<double> v(m, 1.0);
  double mu = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> y = v;
    solve(y);
    double sv = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      sv += v[k];
      sy += y[k];
    }
    double mu_new = sy / sv;
    for (std::size_t k = 0; k < m; ++k) v[k] = y[k] / sy;
    bool done = it > 2 && std::abs(mu_new - mu) <= 1e-13 * mu_new;
    mu = mu_new;
    if (done) break;
  }
  return 1.0 / mu;
}

double ModeFit::rate(double xbar) const { return std::exp(-c0 - c2 * xbar * xbar); }

std::vector<double> fit_samples(double lo, double hi, int count) {
  if (count < 1 || !(hi >= lo)) fail_validation("invalid-input", "bad fit sample range");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return out;
}

ModeFit quoted_mode_fit() { return ModeFit{}; }

ModeFit fit_mode_coefficients(const std::vector<double>& xbars, double half_width, int n) {
  std::vector<double> sq;
  for (double x : xbars) {
    double v = x * x;
    if (std::none_of(sq.begin(), sq.end(), [v](double u) { return std::abs(u - v) <= 1e-12 * (1 + v); }))
      sq.push_back(v);
  }
  if (xbars.size() < 3 || sq.size() < 2)
    fail_validation("degenerate-design", "need >= 3 samples with >= 2 distinct xbar^2 values");
  if (xbars.size() < 3) fail_validation("degenerate-design", "need at least 3 samples");
  ModeFit fit;
  fit.sample_xbars = xbars;
  const auto m = static_cast<Eigen::Index>(xbars.size());
  Mat X(m, 2);
  Vec y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double xb = xbars[static_cast<std::size_t>(i)];
    X(i, 0) = 1.0;
    X(i, 1) = xb * xb;
    y[i] = -std::log(gamma1(xb, half_width, n));
    fit.sample_log_rates.push_back(y[i]);
  }
  Vec c = X.colPivHouseholderQr().solve(y);
  fit.c0 = c[0];
  fit.c2 = c[1];
  Vec r = y - X * c;
  fit.residuals.assign(r.data(), r.data() + r.size());
  fit.max_residual = r.cwiseAbs().maxCoeff();
  return fit;
}

struct RateModel::Table {
  static constexpr double lo = -3.5;
  static constexpr double hi = -0.02;
  static constexpr int count = 100;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
  double cubic_slope;  // d(-log gamma1)/d(|xbar|^3) used below lo

  static std::vector<double> samples() {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = -std::log(gamma1(lo + (hi - lo) * i / (count - 1)));
    return v;
  }
  Table()
      : spline([] {
          auto v = samples();
          return boost::math::interpolators::cardinal_cubic_b_spline<double>(
              v.begin(), v.end(), lo, (hi - lo) / (count - 1));
        }()),
        cubic_slope(4.0 / 3.0) {}

  double neg_log(double xbar) const {
    if (xbar >= hi) return spline(hi);
    if (xbar <= lo) return spline(lo) + cubic_slope * (std::pow(-xbar, 3) - std::pow(-lo, 3));
    return spline(xbar);
  }
};

RateModel RateModel::quadratic(const ModeFit& fit) {
  RateModel r;
  r.kind_ = Kind::quadratic;
  r.fit_ = fit;
  return r;
}

RateModel RateModel::tabulated() {
  static std::once_flag once;
  static std::shared_ptr<const Table> table;
  std::call_once(once, [] { table = std::make_shared<const Table>(); });
  RateModel r;
  r.kind_ = Kind::tabulated;
  r.table_ = table;
  return r;
}

double RateModel::operator()(double xbar) const {
  if (kind_ == Kind::quadratic) return fit_.rate(xbar);
  return std::exp(-table_->neg_log(xbar));
}

ModeResult mode_approx_probability(const XbarTrajectory& xbar, const RateModel& rate) {
  ModeResult res;
  res.xbar_max = xbar.max_value();
  res.valid = xbar.valid();
  if (!res.valid)
    fail_validation("mode-approx-invalid",
                    "xbar reaches " + std::to_string(xbar.max_value()) + " >= 0 at s = " +
                        std::to_string(xbar.argmax()));
  auto f = [&](double s) { return rate(xbar(s)); };
  const auto& nodes = xbar.nodes();
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 400);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); i += stride) {
    double a = nodes[i], b = nodes[std::min(i + stride, nodes.size() - 1)];
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 8, 1e-9);
  }
  res.integral = total;
  res.P = -std::expm1(-total);
  return res;
}

ModeResult mode_approx_canonical(double p0, double p2, const RateModel& rate) {
  XbarTrajectory xb = xbar_trajectory(p0, p2);
  return mode_approx_probability(xb, rate);
}

MonsoonProjection MonsoonProjection::from_fold(const FoldPoint& fold, const Mat& Delta) {
  if (!fold.has_coefficients) fail_validation("invalid-fold", "fold coefficients missing");
  MonsoonProjection p;
  p.a0 = fold.a0;
  p.kappa = fold.kappa;
  p.D = projected_noise(fold.w0, Delta);
  p.A_b = fold.q_b;
  return p;
}

XbarTrajectory xbar_monsoon(const monsoon::AlbedoForcing& f, const MonsoonProjection& proj) {
  CanonicalScaling c = canonical_scaling(proj.a0, proj.kappa, proj.D);
  ForcingProfile q = f.profile();
  auto p = [&](double s) { return c.forcing_scale * (q.value(s / c.time_scale) - proj.A_b); };
  auto dp = [&](double s) { return c.forcing_scale * q.derivative(s / c.time_scale) / c.time_scale; };
  return xbar_trajectory_general(p, dp, 0.0, c.time_scale * f.t_end);
}

ModeResult mode_approx_monsoon(const monsoon::AlbedoForcing& f, const MonsoonProjection& proj,
                               const RateModel& rate) {
  return mode_approx_probability(xbar_monsoon(f, proj), rate);
}

}  // namespace tipping
