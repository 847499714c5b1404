#include "tipping/tipping_det.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <string>

#include "tipping/error.hpp"
#include "tipping/parallel.hpp"

namespace tipping {

std::string to_string(VerdictMethod m) {
  switch (m) {
    case VerdictMethod::inverse_square: return "inverse-square";
    case VerdictMethod::acceleration: return "acceleration";
    case VerdictMethod::simulation: return "simulation";
  }
  return "unknown";
}

TippingVerdict criterion_inverse_square(double d_b, double R, double t_e) {
  if (!(d_b > 0.0)) fail_validation("invalid-input", "d_b must be positive");
  if (!(t_e > 0.0)) fail_validation("invalid-input", "t_e must be positive");
  TippingVerdict v;
  v.method = VerdictMethod::inverse_square;
  v.margin = R <= 0.0 ? 16.0 : 16.0 - d_b * R * t_e * t_e;
  v.tipped = v.margin < 0.0;
  return v;
}

double critical_exceedance_time(double d_b, double R) {
  if (!(d_b > 0.0) || !(R > 0.0)) fail_validation("invalid-input", "d_b and R must be positive");
  return std::sqrt(16.0 / (d_b * R));
}

double critical_amplitude(double d_b, double t_e) {
  if (!(d_b > 0.0) || !(t_e > 0.0)) fail_validation("invalid-input", "d_b and t_e must be positive");
  return 16.0 / (d_b * t_e * t_e);
}

TippingVerdict criterion_acceleration(double q_peak, double q_ddot, double q_b, double d_b) {
  if (!(d_b > 0.0)) fail_validation("invalid-input", "d_b must be positive");
  if (!(q_ddot < 0.0)) fail_validation("not-a-maximum", "second derivative at the peak must be negative");
  TippingVerdict v;
  v.method = VerdictMethod::acceleration;
  v.margin = q_b + std::sqrt(-2.0 * q_ddot / d_b) - q_peak;
  v.tipped = !(v.margin > 0.0);
  return v;
}

double parabolic_exceedance_time(const ParabolicForcing& f) {
  if (f.R0 <= 0.0) return 0.0;
  return std::sqrt(4.0 * f.R0 / (f.eps * f.R2));
}

namespace {

double crossing(const ForcingProfile& q, double threshold, double a, double b) {
  auto g = [&](double t) { return q.value(t) - threshold; };
  auto tol = [](double x, double y) {
    return std::abs(x - y) <= 1e-8 * std::max(1.0, std::max(std::abs(x), std::abs(y)));
  };
  auto r = boost::math::tools::bisect(g, a, b, tol);
  return 0.5 * (r.first + r.second);
}

}  // namespace

Exceedance exceedance_time(const ForcingProfile& q, double threshold) {
  if (const auto* s = std::get_if<SampledForcing>(&q.variant())) {
    int changes = 0;
    for (std::size_t i = 1; i < s->values.size(); ++i)
      if ((s->values[i] > threshold) != (s->values[i - 1] > threshold)) ++changes;
    if (changes > 2)
      fail_validation("not-single-peaked", "forcing crosses the threshold more than twice");
  }
  Exceedance out;
  const double tp = q.peak_time();
  if (!(q.value(tp) > threshold)) return out;
  auto span = q.natural_span();
  double width = std::max(span.second - span.first, 1e-12);

  double L = std::min(span.first, tp - 1e-12);
  for (int k = 0; k < 60 && q.value(L) > threshold; ++k) L = tp - 2.0 * (tp - L) - width;
  double R = std::max(span.second, tp + 1e-12);
  for (int k = 0; k < 60 && q.value(R) > threshold; ++k) R = tp + 2.0 * (R - tp) + width;

  out.exceeded = true;
  out.t_enter = q.value(L) > threshold ? L : crossing(q, threshold, L, tp);
  out.t_leave = q.value(R) > threshold ? R : crossing(q, threshold, tp, R);
  out.t_e = out.t_leave - out.t_enter;
  return out;
}

TippingVerdict classify_by_simulation(const DynamicalSystem& sys, const ForcingProfile& forcing,
                                      const Box& box, const Vec& guess, const ClassifyOptions& opts) {
  sys.validate();
  auto [t0, t1] = forcing.natural_span();
  Vec y0 = find_equilibrium(sys, forcing.value(t0), guess);
  if (leading_eigenvalue(sys, y0, forcing.value(t0)).value >= 0.0)
    fail_validation("invalid-start", "initial equilibrium is not stable");

  TippingVerdict v;
  v.method = VerdictMethod::simulation;
  IntegrateOptions io;
  io.box = box;
  io.record = false;
  Trajectory tr;
  try {
    tr = integrate(sys, y0, t0, t1, forcing, opts.tol, io);
  } catch (const TippingError& e) {
    if (e.code() != "integration-failure") throw;
    v.tipped = true;
    v.integration_failed = true;
    v.margin = kNaN;
    return v;
  }
  if (tr.escaped) {
    v.tipped = true;
    v.margin = tr.escape_time;
    return v;
  }
  Vec y_end = tr.states.row(tr.states.rows() - 1).transpose();
  double q_end = forcing.value(t1);
  Vec y_eq;
  try {
    y_eq = find_equilibrium(sys, q_end, y0);
  } catch (const TippingError&) {
    v.tipped = true;
    v.margin = kNaN;
    return v;
  }
  double rate = leading_eigenvalue(sys, y_eq, q_end).value;
  if (rate < 0.0 && opts.settle_rates > 0.0) {
    // The state lags the moving equilibrium; let it settle under frozen forcing.
    Trajectory rest;
    try {
      rest = integrate(sys, y_end, t1, t1 + opts.settle_rates / -rate,
                       ForcingProfile(ConstantForcing{q_end}), opts.tol, io);
    } catch (const TippingError& e) {
      if (e.code() != "integration-failure") throw;
      v.tipped = true;
      v.integration_failed = true;
      v.margin = kNaN;
      return v;
    }
    if (rest.escaped) {
      v.tipped = true;
      v.margin = rest.escape_time;
      return v;
    }
    y_end = rest.states.row(rest.states.rows() - 1).transpose();
  }
  v.margin = std::abs(sys.w.dot(y_end - y_eq));
  v.tipped = v.margin > opts.return_distance;
  return v;
}

std::vector<CriticalPoint> critical_curve(const DynamicalSystem& sys, const ForcingFamily& family,
                                          const std::vector<double>& t_e_grid, double d_b,
                                          const Box& box, const Vec& guess,
                                          const CriticalCurveOptions& opts) {
  std::vector<CriticalPoint> out(t_e_grid.size());
  auto tipped = [&](double R, double t_e) {
    return classify_by_simulation(sys, family(R, t_e), box, guess, opts.classify).tipped;
  };
  parallel_for(
      t_e_grid.size(),
      [&](std::size_t i) {
        CriticalPoint& cp = out[i];
        cp.t_e = t_e_grid[i];
        cp.R_asymptotic = critical_amplitude(d_b, cp.t_e);
        double lo = opts.lo_factor * cp.R_asymptotic;
        double hi = opts.hi_factor * cp.R_asymptotic;
        try {
          bool found = false;
          for (int k = 0; k <= opts.widen_attempts; ++k) {
            bool lo_safe = !tipped(lo, cp.t_e);
            bool hi_tip = tipped(hi, cp.t_e);
            if (lo_safe && hi_tip) {
              found = true;
              break;
            }
            if (!lo_safe) lo *= 0.25;
            if (!hi_tip) hi *= 4.0;
          }
          if (!found) {
            cp.error = "bracket-failure";
            return;
          }
          while (hi - lo > opts.R_tol) {
            double mid = 0.5 * (lo + hi);
            (tipped(mid, cp.t_e) ? hi : lo) = mid;
          }
          cp.R_crit = 0.5 * (lo + hi);
          cp.ok = true;
        } catch (const TippingError& e) {
          cp.error = e.code();
        }
      },
      opts.workers);
  return out;
}

DbEstimate estimate_db_from_series(const std::vector<double>& x, double dt, double q_c,
                                   double q_b) {
  Violations v;
  v.check(x.size() >= 1000, "series needs at least 1000 samples");
  v.check(dt > 0.0, "dt must be positive");
  v.check(q_b > q_c, "q_c must lie below q_b");
  v.throw_if_any();
  double mean = 0.0;
  for (double s : x) mean += s;
  mean /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - mean;
    den += d * d;
    if (i + 1 < x.size()) num += d * (x[i + 1] - mean);
  }
  if (!(den > 0.0)) fail_validation("invalid-autocorrelation", "series has zero variance");
  double a = num / den;
  if (!(a > 0.0 && a < 1.0))
    fail_validation("invalid-autocorrelation",
                    "lag-1 autocorrelation " + std::to_string(a) + " is outside (0, 1)");
  DbEstimate e;
  e.autocorrelation = a;
  e.lambda = -(1.0 - a) / dt;
  e.d = (1.0 - a) * (1.0 - a) / (dt * dt * (q_b - q_c));
  return e;
}

TippingVerdict dimensionless_check(double a, double q_c, double q_b, double q_peak, double t_e,
                                   double dt) {
  if (!(a > 0.0 && a < 1.0)) fail_validation("invalid-autocorrelation", "autocorrelation outside (0, 1)");
  if (!(q_b > q_c) || !(dt > 0.0)) fail_validation("invalid-input", "need q_c < q_b and dt > 0");
  double Ne = t_e / dt;
  TippingVerdict v;
  v.method = VerdictMethod::inverse_square;
  double over = std::max(0.0, q_peak - q_b);
  v.margin = 16.0 - (1.0 - a) * (1.0 - a) / (q_b - q_c) * over * Ne * Ne;
  v.tipped = v.margin < 0.0;
  return v;
}

}  // namespace tipping
