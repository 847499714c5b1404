#include "tipping/monsoon.hpp"

#include <cmath>

#include "tipping/error.hpp"

namespace tipping::monsoon {

MonsoonParams MonsoonParams::reference() {
  MonsoonParams p;
  p.C_H = 0.70;
  return p;
}

namespace {

template <class F>
void for_each_param(MonsoonParams& p, F&& f) {
  f("T_oc", p.T_oc);
  f("T_0", p.T_0);
  f("Q_oc", p.Q_oc);
  f("Q_sat", p.Q_sat);
  f("L", p.L);
  f("C_E", p.C_E);
  f("C_P", p.C_P);
  f("C_mo", p.C_mo);
  f("C_ml", p.C_ml);
  f("C_L1", p.C_L1);
  f("C_L2", p.C_L2);
  f("F_down_SL_TA", p.F_down_SL_TA);
  f("C_H", p.C_H);
  f("theta_oc", p.theta_oc);
  f("Gamma_0", p.Gamma_0);
  f("Gamma_1", p.Gamma_1);
  f("Gamma_2", p.Gamma_2);
  f("Gamma_a", p.Gamma_a);
  f("z_h", p.z_h);
  f("I_q", p.I_q);
  f("I_T", p.I_T);
  f("beta", p.beta);
}

}  // namespace

void MonsoonParams::validate() const {
  Violations v;
  MonsoonParams copy = *this;
  for_each_param(copy, [&](const char* name, double& val) {
    std::string n = name;
    if (!std::isfinite(val))
      v.check(false, n + " must be finite");
    else if (n == "C_L2")
      v.check(val < 0.0, "C_L2 must be negative");
    else
      v.check(val > 0.0, n + " must be positive");
  });
  v.throw_if_any("invalid-params");
}

std::vector<std::pair<std::string, double>> param_table(const MonsoonParams& p) {
  std::vector<std::pair<std::string, double>> out;
  MonsoonParams copy = p;
  for_each_param(copy, [&](const char* name, double& val) { out.emplace_back(name, val); });
  return out;
}

void set_param(MonsoonParams& p, const std::string& name, double value) {
  bool found = false;
  for_each_param(p, [&](const char* n, double& val) {
    if (name == n) {
      val = value;
      found = true;
    }
  });
  if (!found) fail_validation("invalid-params", "unknown monsoon parameter '" + name + "'");
}

Terms terms(double Q, double T, const MonsoonParams& p) {
  Terms t{};
  t.E = p.C_E * (T - p.T_oc) * (p.Q_sat - Q);
  t.P = p.C_P * Q;
  t.A_v = (T - p.T_oc) * (p.C_mo * p.Q_oc - p.C_ml * Q);
  t.F_up = p.C_L1 * T + p.C_L2;
  t.Gamma = p.Gamma_0 + p.Gamma_1 * (T - p.T_0) * (1.0 - p.Gamma_2 * Q * Q);
  t.theta_a = T - (t.Gamma - p.Gamma_a) * p.z_h;
  t.A_T = p.C_H * (T - p.T_oc) * (p.theta_oc - t.theta_a);
  return t;
}

Tendency monsoon_rhs(double Q, double T, double A_sys, const MonsoonParams& p) {
  Terms t = terms(Q, T, p);
  Tendency d;
  d.dQ = (t.E - t.P + t.A_v) / (p.beta * p.I_q);
  d.dT = (p.L * (t.P - t.E) - t.F_up + p.F_down_SL_TA * (1.0 - A_sys) + t.A_T) / (p.beta * p.I_T);
  return d;
}

Vec default_output_weights() { return Vec{{-3.50, -0.99}}; }

DynamicalSystem make_system(const MonsoonParams& p, const Vec& w) {
  p.validate();
  DynamicalSystem sys;
  sys.dim = 2;
  sys.w = w;
  sys.rhs = [p](const Vec& y, double A) {
    Tendency d = monsoon_rhs(y[0], y[1], A, p);
    return Vec{{d.dQ, d.dT}};
  };
  sys.validate();
  return sys;
}

Box escape_box() { return Box{Vec{{-0.04, 295.0}}, Vec{{0.07, 315.0}}}; }

Vec default_guess() { return Vec{{0.03, 306.0}}; }

ForcingProfile AlbedoForcing::profile() const {
  return ForcingProfile(Sech2Forcing{A_inf, R, S, t_end, A_b});
}

double albedo(double t, const AlbedoForcing& f) {
  double c = std::cosh(f.S * (f.t_end - 2.0 * t));
  return f.A_inf + (f.R + f.A_b - f.A_inf) / (c * c);
}

double exceedance_time_approx(const AlbedoForcing& f) {
  if (f.R <= 0.0) return 0.0;
  return std::sqrt(f.R / (f.A_b - f.A_inf)) / f.S;
}

double exceedance_time_exact(const AlbedoForcing& f) {
  return sech2_exceedance_time(f.R + f.A_b - f.A_inf, f.A_b - f.A_inf, f.S);
}

AlbedoForcing scenario(double R, double S, double A_b, double start_rel) {
  AlbedoForcing f;
  f.R = R;
  f.S = S;
  f.A_b = A_b;
  f.t_end = sech2_duration(R + A_b - f.A_inf, S, start_rel * (A_b - f.A_inf));
  return f;
}

FoldPoint fold(const MonsoonParams& p, const Vec& w) {
  DynamicalSystem sys = make_system(p, w);
  FoldPoint fp = locate_fold(sys, kBackgroundAlbedo, 0.60, default_guess());
  return normal_form_coefficients(sys, fp);
}

std::vector<BranchRow> equilibrium_branches(const MonsoonParams& p, double A_lo, double A_hi,
                                            int points) {
  if (!(A_lo > 0.0 && A_hi < 1.0 && A_lo < A_hi))
    fail_validation("invalid-range", "albedo range must satisfy 0 < A_lo < A_hi < 1");
  DynamicalSystem sys = make_system(p);
  // Start the stable branch from the background state, then walk to A_lo.
  Vec y = find_equilibrium(sys, kBackgroundAlbedo, default_guess());
  FoldPoint fp = normal_form_coefficients(sys, locate_fold(sys, kBackgroundAlbedo, 0.60, y));
  y = find_equilibrium(sys, A_lo, y);

  std::vector<BranchRow> rows;
  const double top = std::min(A_hi, fp.q_b);
  auto row = [&](double A, const Vec& yy) {
    rows.push_back({A, yy[0], yy[1], leading_eigenvalue(sys, yy, A).value < 0.0});
  };
  if (A_lo >= fp.q_b) return rows;
  // Cluster points towards the fold, where the branches curve fastest.
  auto A_at = [&](int k) {
    double s = static_cast<double>(k) / points;
    return top - (top - A_lo) * (1.0 - s) * (1.0 - s);
  };
  for (int k = 0; k < points; ++k) {
    double A = A_at(k);
    y = find_equilibrium(sys, A, y);
    row(A, y);
  }
  if (A_hi >= fp.q_b) row(fp.q_b, fp.y_b);

  // Unstable branch: seed on the other side of the fold and walk back down.
  double delta = 1e-6;
  Vec yu = fp.y_b;
  for (double sgn : {1.0, -1.0}) {
    Vec guess = fp.y_b + sgn * std::sqrt(delta / fp.kappa) * fp.v0;
    try {
      Vec cand = find_equilibrium(sys, fp.q_b - delta, guess);
      if (leading_eigenvalue(sys, cand, fp.q_b - delta).value > 0.0) {
        yu = cand;
        break;
      }
    } catch (const TippingError&) {
    }
  }
  for (int k = points - 1; k >= 0; --k) {
    double A = A_at(k);
    yu = find_equilibrium(sys, A, yu);
    row(A, yu);
  }
  return rows;
}

}  // namespace tipping::monsoon
