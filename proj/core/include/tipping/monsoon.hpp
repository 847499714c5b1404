#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tipping/dynsys.hpp"
#include "tipping/forcing.hpp"

namespace tipping::monsoon {

// Simplified Indian-summer-monsoon model; time unit is decades.
struct MonsoonParams {
  double T_oc = 300.0;        // K
  double T_0 = 273.2;         // K
  double Q_oc = 0.0190;       // 1
  double Q_sat = 0.0401;      // 1
  double L = 2.5e6;           // m^2 s^-2
  double C_E = 3.4375e-4;     // mm s^-1 K^-1
  double C_P = 0.0027;        // mm s^-1
  double C_mo = 6.9021e-4;    // mm s^-1 K^-1
  double C_ml = 1.6213e-4;    // mm s^-1 K^-1
  double C_L1 = 1.6642;       // kg s^-3 K^-1
  double C_L2 = -263.3753;    // kg s^-3
  double F_down_SL_TA = 443.6250;  // kg s^-3
  double C_H = 0.7136;        // kg s^-3 K^-2
  double theta_oc = 300.2356; // K
  double Gamma_0 = 0.0053;    // K m^-1
  double Gamma_1 = 5.5e-5;    // m^-1
  double Gamma_2 = 1000.0;    // 1
  double Gamma_a = 0.0098;    // K m^-1
  double z_h = 5.1564e3;      // m
  double I_q = 2.0636e3;      // mm
  double I_T = 1.1958e9;      // kg s^-2 K^-1
  double beta = 3.1710e-9;    // decades s^-1

  // Tabulated values with C_H = 0.70; this set puts the fold at A_b = 0.5287
  // with d_b = 318.3 per decade^2.
  static MonsoonParams reference();

  void validate() const;
};

// Named access keyed by the table symbols (T_oc, C_H, ...).
std::vector<std::pair<std::string, double>> param_table(const MonsoonParams& p);
void set_param(MonsoonParams& p, const std::string& name, double value);

struct Tendency {
  double dQ = 0.0;
  double dT = 0.0;
};

// Individual flux terms, exposed for inspection and testing.
struct Terms {
  double E, P, A_v, F_up, Gamma, theta_a, A_T;
};
Terms terms(double Q_a, double T_a, const MonsoonParams& p);

Tendency monsoon_rhs(double Q_a, double T_a, double A_sys, const MonsoonParams& p);

// Output weights quoted for the projection; the recomputed left nullvector is close.
Vec default_output_weights();
DynamicalSystem make_system(const MonsoonParams& p, const Vec& w = default_output_weights());

// Validity box [-0.04, 0.07] x [295, 315].
Box escape_box();
Vec default_guess();  // near the stable state at A_sys = 0.47
inline constexpr double kBackgroundAlbedo = 0.47;

struct AlbedoForcing {
  double A_inf = kBackgroundAlbedo;
  double R = 0.0;
  double S = 0.5;
  double t_end = 20.0;
  double A_b = 0.5287;

  ForcingProfile profile() const;
};

double albedo(double t, const AlbedoForcing& f);
// (1/S) sqrt(R / (A_b - A_inf)); first-order approximation of the exceedance time.
double exceedance_time_approx(const AlbedoForcing& f);
// Exact time spent above A_b.
double exceedance_time_exact(const AlbedoForcing& f);
// Forcing with peak A_b + R and speed S; the window starts where
// A - A_inf = start_rel * (A_b - A_inf).
AlbedoForcing scenario(double R, double S, double A_b, double start_rel = 1e-4);

FoldPoint fold(const MonsoonParams& p, const Vec& w = default_output_weights());

struct BranchRow {
  double A_sys;
  double Q_a;
  double T_a;
  bool stable;
};
// Stable branch from A_lo up to the fold and unstable branch back down to A_lo.
std::vector<BranchRow> equilibrium_branches(const MonsoonParams& p, double A_lo, double A_hi,
                                            int points = 60);

}  // namespace tipping::monsoon
