#include "tipping/escape_grid.hpp"

#include <cmath>
#include <functional>

#include "tipping/error.hpp"
#include "tipping/normal_form.hpp"
#include "tipping/parallel.hpp"

namespace tipping {

std::string to_string(EscapeMethod m) {
  switch (m) {
    case EscapeMethod::fpe: return "fpe";
    case EscapeMethod::mode: return "mode";
    case EscapeMethod::monte_carlo: return "mc";
    case EscapeMethod::fpe2d: return "fpe2d";
  }
  return "unknown";
}

EscapeMethod parse_escape_method(const std::string& s) {
  if (s == "fpe") return EscapeMethod::fpe;
  if (s == "mode") return EscapeMethod::mode;
  if (s == "mc" || s == "monte-carlo") return EscapeMethod::monte_carlo;
  if (s == "fpe2d") return EscapeMethod::fpe2d;
  fail_validation("invalid-method", "unknown escape method '" + s + "'");
}

std::pair<double, double> canonical_from_exceedance(double p0_th, double R, double t_e) {
  if (!(R > 0.0) || !(t_e > 0.0))
    fail_validation("invalid-axis", "exceedance amplitude and time must be positive");
  return {p0_th + R, 4.0 * R / (t_e * t_e)};
}

namespace {

bool past(const EscapeGridOptions& o) {
  return o.deadline && std::chrono::steady_clock::now() > *o.deadline;
}

void fill_grid(EscapeGrid& g, const EscapeGridOptions& opts,
               const std::function<void(EscapeNode&)>& eval) {
  g.nodes.resize(g.axis1.size() * g.axis2.size());
  for (std::size_t i = 0; i < g.axis1.size(); ++i)
    for (std::size_t j = 0; j < g.axis2.size(); ++j) {
      EscapeNode& n = g.nodes[i * g.axis2.size() + j];
      n.axis1 = g.axis1[i];
      n.axis2 = g.axis2[j];
    }
  std::vector<char> skipped(g.nodes.size(), 0);
  // Monte-Carlo nodes fan out internally over path batches instead.
  unsigned workers = g.method == EscapeMethod::monte_carlo ? 1u : opts.workers;
  parallel_for(
      g.nodes.size(),
      [&](std::size_t k) {
        EscapeNode& n = g.nodes[k];
        if (past(opts)) {
          n.note = "budget-exceeded";
          skipped[k] = 1;
          return;
        }
        try {
          eval(n);
          n.valid = true;
        } catch (const TippingError& e) {
          n.valid = false;
          n.note = e.code();
        }
      },
      workers);
  for (char s : skipped)
    if (s) g.complete = false;
}

}  // namespace

namespace {

EscapeGrid canonical_grid(const std::vector<double>& a1, const std::vector<double>& a2,
                          double threshold, EscapeMethod method, const EscapeGridOptions& opts,
                          const std::function<std::pair<double, double>(double, double)>& to_p) {
  if (method == EscapeMethod::fpe2d)
    fail_validation("invalid-method", "fpe2d applies to the monsoon grid only");
  EscapeGrid g;
  g.axis1 = a1;
  g.axis2 = a2;
  g.threshold = threshold;
  g.method = method;
  fill_grid(g, opts, [&](EscapeNode& n) {
    auto [p0, p2] = to_p(n.axis1, n.axis2);
    n.p0 = p0;
    n.p2 = p2;
    switch (method) {
      case EscapeMethod::fpe:
        n.prob = solve_fpe_1d(p0, p2, opts.fpe).P_esc;
        break;
      case EscapeMethod::mode:
        n.prob = mode_approx_canonical(p0, p2, opts.rate).P;
        break;
      case EscapeMethod::monte_carlo: {
        const FpeGrid1D& f = opts.fpe;
        double T0 = std::isnan(f.T0) ? 0.0 : f.T0;
        McResult r =
            monte_carlo_escape(canonical_sde(p0, p2, T0, f.x_bd, f.x0, f.var0), opts.mc);
        n.prob = r.P;
        n.se = r.se;
        break;
      }
      case EscapeMethod::fpe2d:
        break;
    }
  });
  return g;
}

}  // namespace

EscapeGrid escape_grid_1d(double p0_th, const std::vector<double>& R_axis,
                          const std::vector<double>& te_axis, EscapeMethod method,
                          const EscapeGridOptions& opts) {
  return canonical_grid(R_axis, te_axis, p0_th, method, opts, [p0_th](double R, double te) {
    return canonical_from_exceedance(p0_th, R, te);
  });
}

EscapeGrid escape_grid_q(const std::vector<double>& q1_axis, const std::vector<double>& q2_axis,
                         EscapeMethod method, const EscapeGridOptions& opts) {
  return canonical_grid(q1_axis, q2_axis, 0.0, method, opts, [](double q1, double q2) {
    if (!(q1 > 0.0)) fail_validation("invalid-axis", "q1 must be positive");
    return q_inverse(q1, q2);
  });
}

namespace {

// Largest t in [lo, hi] with pred(t) true, assuming pred switches once from
// true to false. NaN if pred(lo) is false or pred(hi) is true.
double last_true(const std::function<bool(double)>& pred, double lo, double hi) {
  if (!pred(lo) || pred(hi)) return kNaN;
  for (int k = 0; k < 50 && hi - lo > 1e-6 * hi; ++k) {
    double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool orbit_valid(const std::function<XbarTrajectory()>& make) {
  try {
    return make().valid();
  } catch (const TippingError& e) {
    if (e.code() == "no-connecting-orbit") return false;
    throw;
  }
}

bool orbit_connects(const std::function<XbarTrajectory()>& make) {
  try {
    make();
    return true;
  } catch (const TippingError& e) {
    if (e.code() == "no-connecting-orbit") return false;
    throw;
  }
}

}  // namespace

std::vector<BoundaryRow> escape_boundaries_1d(double p0_th, const std::vector<double>& R_axis,
                                              double te_lo, double te_hi) {
  std::vector<BoundaryRow> out;
  for (double R : R_axis) {
    BoundaryRow row;
    row.R = R;
    if (p0_th + R > 0.0) row.te_deterministic = 2.0 * std::sqrt(R) / (p0_th + R);
    row.te_mode_valid = last_true(
        [&](double te) {
          auto [p0, p2] = canonical_from_exceedance(p0_th, R, te);
          return orbit_valid([&] { return xbar_trajectory(p0, p2); });
        },
        te_lo, te_hi);
    out.push_back(row);
  }
  return out;
}

monsoon::AlbedoForcing monsoon_grid_forcing(const MonsoonGridSetup& s, double R_th, double t_e) {
  Sech2Forcing f = sech2_for_exceedance(monsoon::kBackgroundAlbedo, s.projection.A_b, s.threshold,
                                        R_th, t_e, s.start_gap);
  monsoon::AlbedoForcing a;
  a.A_inf = f.q_inf;
  a.R = f.R;
  a.S = f.S;
  a.t_end = f.t_end;
  a.A_b = f.q_b;
  return a;
}

EscapeGrid escape_grid_monsoon(const MonsoonGridSetup& s, const std::vector<double>& R_axis,
                               const std::vector<double>& te_axis, EscapeMethod method,
                               const EscapeGridOptions& opts) {
  if (method == EscapeMethod::fpe)
    fail_validation("invalid-method", "the monsoon grid uses mode, fpe2d or mc");
  EscapeGrid g;
  g.axis1 = R_axis;
  g.axis2 = te_axis;
  g.threshold = s.threshold;
  g.method = method;
  CanonicalScaling c = canonical_scaling(s.projection.a0, s.projection.kappa, s.projection.D);
  fill_grid(g, opts, [&](EscapeNode& n) {
    monsoon::AlbedoForcing f = monsoon_grid_forcing(s, n.axis1, n.axis2);
    // Local canonical parameters at the peak: p0 from the peak value, p2 from the curvature.
    double amp = f.R + f.A_b - f.A_inf;
    n.p0 = c.forcing_scale * f.R;
    n.p2 = c.forcing_scale * 4.0 * amp * f.S * f.S / (c.time_scale * c.time_scale);
    switch (method) {
      case EscapeMethod::mode:
        n.prob = mode_approx_monsoon(f, s.projection, opts.rate).P;
        break;
      case EscapeMethod::fpe2d:
        n.prob = solve_fpe_2d_monsoon(s.params, f, s.D1, s.D2, opts.fpe2d).P_esc;
        break;
      case EscapeMethod::monte_carlo: {
        McResult r = monte_carlo_escape(monsoon_sde(s.params, f, s.D1, s.D2), opts.mc);
        n.prob = r.P;
        n.se = r.se;
        break;
      }
      case EscapeMethod::fpe:
        break;
    }
  });
  return g;
}

std::vector<BoundaryRow> escape_boundaries_monsoon(const MonsoonGridSetup& s,
                                                   const std::vector<double>& R_axis, double te_lo,
                                                   double te_hi) {
  std::vector<BoundaryRow> out;
  for (double R : R_axis) {
    BoundaryRow row;
    row.R = R;
    auto make = [&](double te) {
      return [&, te] { return xbar_monsoon(monsoon_grid_forcing(s, R, te), s.projection); };
    };
    row.te_deterministic =
        last_true([&](double te) { return orbit_connects(make(te)); }, te_lo, te_hi);
    row.te_mode_valid = last_true([&](double te) { return orbit_valid(make(te)); }, te_lo, te_hi);
    out.push_back(row);
  }
  return out;
}

}  // namespace tipping
