#include "tipping/fpe2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tipping/error.hpp"
#include "tridiag.hpp"

namespace tipping {

void Fpe2dGrid::validate() const {
  Violations v;
  v.check(nQ >= 8 && nT >= 8, "grid needs at least 8 points per axis");
  v.check(Q_hi > Q_lo && T_hi > T_lo, "domain bounds must be ordered");
  v.check(dt > 0.0, "dt must be positive");
  v.check(relax_time >= 0.0, "relax_time must be >= 0");
  v.throw_if_any("invalid-grid");
}

namespace {

struct Solver2d {
  const monsoon::MonsoonParams& p;
  const Fpe2dGrid& g;
  double D1, D2;
  std::size_t nq, nt;  // interior counts
  double dq, dT;
  std::vector<double> Qn, Tn;  // full-grid coordinates
  std::vector<detail::Tridiag> Aq;  // one per interior T row, independent of A_sys
  std::vector<double> tface;      // drift at T faces for the current albedo
  std::vector<double> u, line, tmp, work, start;
  double gam, c1f, c2f, w1, w0;

  Solver2d(const monsoon::MonsoonParams& pp, const Fpe2dGrid& gg, double d1, double d2)
      : p(pp), g(gg), D1(d1), D2(d2) {
    nq = static_cast<std::size_t>(g.nQ) - 2;
    nt = static_cast<std::size_t>(g.nT) - 2;
    dq = (g.Q_hi - g.Q_lo) / (g.nQ - 1);
    dT = (g.T_hi - g.T_lo) / (g.nT - 1);
    Qn.resize(static_cast<std::size_t>(g.nQ));
    Tn.resize(static_cast<std::size_t>(g.nT));
    for (std::size_t i = 0; i < Qn.size(); ++i) Qn[i] = g.Q_lo + dq * static_cast<double>(i);
    for (std::size_t j = 0; j < Tn.size(); ++j) Tn[j] = g.T_lo + dT * static_cast<double>(j);
    gam = 2.0 - std::sqrt(2.0);
    w1 = 1.0 / (gam * (2.0 - gam));
    w0 = (1.0 - gam) * (1.0 - gam) / (gam * (2.0 - gam));
    c1f = 0.5 * gam;
    c2f = (1.0 - gam) / (2.0 - gam);

    // dQ/dt does not involve the albedo, so the Q sweeps are fixed.
    Aq.resize(nt);
    std::vector<double> b(Qn.size() - 1);
    for (std::size_t j = 0; j < nt; ++j) {
      double T = Tn[j + 1];
      for (std::size_t k = 0; k + 1 < Qn.size(); ++k)
        b[k] = monsoon::monsoon_rhs(Qn[k] + 0.5 * dq, T, 0.0, p).dQ;
      detail::sg_operator(b.data(), Qn.size(), dq, D1, Aq[j]);
    }
    tface.resize(nq * (Tn.size() - 1));
    u.assign(nq * nt, 0.0);
  }

  void set_albedo(double A) {
    for (std::size_t i = 0; i < nq; ++i) {
      double Q = Qn[i + 1];
      for (std::size_t k = 0; k + 1 < Tn.size(); ++k)
        tface[i * (Tn.size() - 1) + k] = monsoon::monsoon_rhs(Q, Tn[k] + 0.5 * dT, A, p).dT;
    }
  }

  // One TR-BDF2 step of length h for a fixed operator on a single line.
  void trbdf2(const detail::Tridiag& A, double h, std::vector<double>& v) {
    tmp.resize(v.size());
    A.apply_shifted(c1f * h, v.data(), tmp.data());
    A.solve_shifted(c1f * h, tmp.data(), work);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = w1 * tmp[k] - w0 * v[k];
    A.solve_shifted(c2f * h, v.data(), work);
  }

  // As in 1D, a line that undershoots is redone with substeps.
  void advance(const detail::Tridiag& A, double h, std::vector<double>& v) {
    start.assign(v.begin(), v.end());
    for (int sub = 1;; sub *= 2) {
      for (int j = 0; j < sub; ++j) trbdf2(A, h / sub, v);
      if (*std::min_element(v.begin(), v.end()) >= -1e-10 || sub >= 64) return;
      v.assign(start.begin(), start.end());
    }
  }

  void sweep_q(double h) {
    line.resize(nq);
    for (std::size_t j = 0; j < nt; ++j) {
      double* row = u.data() + j * nq;
      std::copy(row, row + nq, line.begin());
      advance(Aq[j], h, line);
      std::copy(line.begin(), line.end(), row);
    }
  }

  void sweep_t(double h) {
    line.resize(nt);
    detail::Tridiag A(nt);
    for (std::size_t i = 0; i < nq; ++i) {
      detail::sg_operator(tface.data() + i * (Tn.size() - 1), Tn.size(), dT, D2, A);
      for (std::size_t j = 0; j < nt; ++j) line[j] = u[j * nq + i];
      advance(A, h, line);
      for (std::size_t j = 0; j < nt; ++j) u[j * nq + i] = line[j];
    }
  }

  // Strang splitting with the T operator frozen at the step midpoint.
  void step(double h, double A_mid) {
    set_albedo(A_mid);
    sweep_q(0.5 * h);
    sweep_t(h);
    sweep_q(0.5 * h);
  }

  double mass() const {
    double m = 0.0;
    for (double v : u) m += v;
    return m * dq * dT;
  }

  double min_value() const { return *std::min_element(u.begin(), u.end()); }
};

}  // namespace

Fpe2dResult solve_fpe_2d_monsoon(const monsoon::MonsoonParams& p,
                                 const monsoon::AlbedoForcing& forcing, double D1, double D2,
                                 const Fpe2dGrid& grid) {
  grid.validate();
  if (!(D1 > 0.0) || !(D2 > 0.0)) fail_validation("invalid-grid", "noise variances must be positive");
  if (!(forcing.t_end > 0.0)) fail_validation("invalid-forcing", "forcing window must be nonempty");
  p.validate();

  Solver2d s(p, grid, D1, D2);

  // Seed: Gaussian around the stable state at A(0), then power iteration of the
  // frozen propagator, renormalized every step.
  const double A0 = monsoon::albedo(0.0, forcing);
  DynamicalSystem sys = monsoon::make_system(p);
  Vec y0 = find_equilibrium(sys, A0, monsoon::default_guess());
  const double sq = std::max(4.0 * s.dq, 0.003), sT = std::max(4.0 * s.dT, 0.5);
  for (std::size_t j = 0; j < s.nt; ++j)
    for (std::size_t i = 0; i < s.nq; ++i) {
      double a = (s.Qn[i + 1] - y0[0]) / sq, b = (s.Tn[j + 1] - y0[1]) / sT;
      s.u[j * s.nq + i] = std::exp(-0.5 * (a * a + b * b));
    }
  double m = s.mass();
  for (double& v : s.u) v /= m;

  Fpe2dResult res;
  const int relax_steps = static_cast<int>(std::ceil(grid.relax_time / grid.dt - 1e-9));
  std::vector<double> prev;
  for (int k = 0; k < relax_steps; ++k) {
    prev = s.u;
    s.step(grid.dt, A0);
    m = s.mass();
    if (!(m > 0.0) || !std::isfinite(m))
      fail_numerical("discretization-failure", "density vanished while building the initial mode");
    double change = 0.0;
    for (std::size_t q = 0; q < s.u.size(); ++q) {
      s.u[q] /= m;
      change += std::abs(s.u[q] - prev[q]);
    }
    res.relax_change = change * s.dq * s.dT;
    if (res.relax_change < grid.relax_tol) break;
  }

  const int nsteps = std::max(1, static_cast<int>(std::ceil(forcing.t_end / grid.dt - 1e-9)));
  const double h = forcing.t_end / nsteps;
  double mass = 1.0;
  double min_u = std::min(0.0, s.min_value());
  const int record_every = std::max(1, nsteps / 200);
  res.times.push_back(0.0);
  res.mass.push_back(1.0);
  for (int k = 0; k < nsteps; ++k) {
    double t = k * h;
    s.step(h, monsoon::albedo(t + 0.5 * h, forcing));
    double mk = s.mass();
    min_u = std::min(min_u, s.min_value());
    if (min_u < -1e-8)
      fail_numerical("discretization-failure", "negative density at t = " + std::to_string(t + h));
    if (mk > mass + 1e-8 || !std::isfinite(mk))
      fail_numerical("discretization-failure", "mass grew at t = " + std::to_string(t + h));
    mass = mk;
    if ((k + 1) % record_every == 0 || k + 1 == nsteps) {
      res.times.push_back(t + h);
      res.mass.push_back(mass);
    }
  }
  res.steps = nsteps;
  res.min_density = min_u;
  res.mass_final = mass;
  res.P_esc = std::clamp(1.0 - mass, 0.0, 1.0);
  return res;
}

}  // namespace tipping
