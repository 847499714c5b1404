#pragma once

#include <vector>

#include "tipping/monsoon.hpp"

namespace tipping {

struct Fpe2dGrid {
  int nQ = 256;  // grid points per axis including Dirichlet ends
  int nT = 256;
  double Q_lo = -0.04, Q_hi = 0.07;
  double T_lo = 295.0, T_hi = 315.0;
  double dt = 2e-3;           // decades
  double relax_time = 6.0;    // frozen-forcing power iteration for the initial density
  double relax_tol = 1e-10;   // stop once the normalized density changes less (L1)

  void validate() const;
};

struct Fpe2dResult {
  double P_esc = 0.0;
  double mass_final = 1.0;
  std::vector<double> times;  // coarse mass history
  std::vector<double> mass;
  double min_density = 0.0;
  int steps = 0;
  double relax_change = 0.0;  // last L1 change of the initial-density iteration
};

// 2D Fokker-Planck equation of the monsoon model with noise variances (D1, D2)
// over [0, t_end]; Strang splitting of Scharfetter-Gummel TR-BDF2 sweeps.
// Starts from the dominant mode of the frozen operator at A(0).
Fpe2dResult solve_fpe_2d_monsoon(const monsoon::MonsoonParams& p,
                                 const monsoon::AlbedoForcing& forcing, double D1 = 0.01,
                                 double D2 = 3.0, const Fpe2dGrid& grid = {});

}  // namespace tipping
