#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "tipping/fpe1d.hpp"
#include "tipping/fpe2d.hpp"
#include "tipping/mode.hpp"
#include "tipping/monte_carlo.hpp"

namespace tipping {

enum class EscapeMethod { fpe, mode, monte_carlo, fpe2d };
std::string to_string(EscapeMethod m);
EscapeMethod parse_escape_method(const std::string& s);

struct EscapeNode {
  double axis1 = 0.0;  // exceedance amplitude over the threshold
  double axis2 = 0.0;  // exceedance time over the threshold
  double p0 = kNaN;
  double p2 = kNaN;
  double prob = kNaN;
  double se = kNaN;  // Monte-Carlo standard error
  bool valid = false;
  std::string note;  // error code for failed or refused nodes
};

struct EscapeGrid {
  std::vector<double> axis1;
  std::vector<double> axis2;
  double threshold = 0.0;
  EscapeMethod method = EscapeMethod::fpe;
  std::vector<EscapeNode> nodes;  // axis1-major: index i * axis2.size() + j
  bool complete = true;          // false when the time budget ran out

  const EscapeNode& at(std::size_t i, std::size_t j) const { return nodes[i * axis2.size() + j]; }
};

struct EscapeGridOptions {
  FpeGrid1D fpe;
  RateModel rate = RateModel::tabulated();
  McOptions mc;
  Fpe2dGrid fpe2d;
  unsigned workers = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// (R, t_e) over threshold p0_th -> (p0, p2) = (p0_th + R, 4 R / t_e^2).
std::pair<double, double> canonical_from_exceedance(double p0_th, double R, double t_e);

EscapeGrid escape_grid_1d(double p0_th, const std::vector<double>& R_axis,
                          const std::vector<double>& te_axis, EscapeMethod method,
                          const EscapeGridOptions& opts = {});

// Grid over the transformed plane (q1, q2) = (sqrt(p2), p0 - sqrt(p2)); q1 > 0.
EscapeGrid escape_grid_q(const std::vector<double>& q1_axis, const std::vector<double>& q2_axis,
                         EscapeMethod method, const EscapeGridOptions& opts = {});

struct BoundaryRow {
  double R = 0.0;
  double te_deterministic = kNaN;  // p0 = sqrt(p2)
  double te_mode_valid = kNaN;     // largest t_e with xbar < 0 throughout
};

// Overlay curves in the (R, t_e) plane; t_e searched within [te_lo, te_hi].
std::vector<BoundaryRow> escape_boundaries_1d(double p0_th, const std::vector<double>& R_axis,
                                              double te_lo, double te_hi);

// Monsoon grid over (R^(th), t_e^(th)); the window starts where A - A_inf = start_gap.
struct MonsoonGridSetup {
  monsoon::MonsoonParams params = monsoon::MonsoonParams::reference();
  MonsoonProjection projection;
  double threshold = 0.5;
  double start_gap = 0.001;
  double D1 = 0.01;
  double D2 = 3.0;
};

monsoon::AlbedoForcing monsoon_grid_forcing(const MonsoonGridSetup& setup, double R_th, double t_e);

EscapeGrid escape_grid_monsoon(const MonsoonGridSetup& setup, const std::vector<double>& R_axis,
                               const std::vector<double>& te_axis, EscapeMethod method,
                               const EscapeGridOptions& opts = {});

std::vector<BoundaryRow> escape_boundaries_monsoon(const MonsoonGridSetup& setup,
                                                   const std::vector<double>& R_axis, double te_lo,
                                                   double te_hi);

}  // namespace tipping
