#pragma once

#include <functional>
#include <vector>

#include "tipping/dynsys.hpp"

namespace tipping {

struct FpeGrid1D {
  double x_bd = 8.0;  // domain [-x_bd, x_bd]
  int nx = 801;       // grid points including the two Dirichlet ends
  double T0 = kNaN;   // half-window; NaN picks sqrt((x0^2 + p0)/p2)
  int nt = 0;         // time steps; 0 picks the smallest count with dt <= dx
  double x0 = -4.0;   // initial Gaussian mean
  double var0 = 1.0;  // initial Gaussian variance
  int history_stride = 0;  // keep every k-th density; 0 keeps none

  void validate() const;
};

struct FpeResult {
  double P_esc = kNaN;
  double T0 = kNaN;
  int nt = 0;
  std::vector<double> x;              // full grid
  std::vector<double> final_density;  // on the full grid
  std::vector<double> mass;           // after every step, mass[0] = initial
  std::vector<double> history_times;
  std::vector<std::vector<double>> history;
  double min_density = 0.0;
};

// Drift b(x, t) of d_t u = D u_xx - (b u)_x.
using Drift1D = std::function<double(double x, double t)>;

// Scharfetter-Gummel flux with TR-BDF2 steps on [t0, t1]; absorbing ends.
FpeResult solve_fpe_1d_drift(const Drift1D& drift, double t0, double t1, const FpeGrid1D& grid,
                             double diffusion = 1.0);

double default_T0(double p0, double p2, double x0 = -4.0);

// Canonical problem: drift p0 - p2 t^2 + x^2 on [-T0, T0], D = 1.
FpeResult solve_fpe_1d(double p0, double p2, const FpeGrid1D& grid = {});

}  // namespace tipping
