#include "tipping/fpe1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tipping/error.hpp"
#include "tridiag.hpp"

namespace tipping {

void FpeGrid1D::validate() const {
  Violations v;
  v.check(x_bd > 0.0, "x_bd must be positive");
  v.check(nx >= 5, "nx must be >= 5");
  v.check(nt >= 0, "nt must be >= 0");
  v.check(var0 > 0.0, "var0 must be positive");
  v.check(x0 > -x_bd && x0 < x_bd, "x0 must lie inside the domain");
  v.check(std::isnan(T0) || T0 > 0.0, "T0 must be positive");
  v.check(history_stride >= 0, "history_stride must be >= 0");
  v.throw_if_any("invalid-grid");
}

double default_T0(double p0, double p2, double x0) {
  if (!(p2 > 0.0)) fail_validation("invalid-grid", "p2 must be positive");
  double num = x0 * x0 + p0;
  if (num <= 0.0) num = 1.0;
  return std::sqrt(num / p2);
}

FpeResult solve_fpe_1d_drift(const Drift1D& drift, double t0, double t1, const FpeGrid1D& grid,
                             double diffusion) {
  grid.validate();
  if (!(t1 > t0)) fail_validation("invalid-grid", "time window must be nonempty");
  if (!(diffusion > 0.0)) fail_validation("invalid-grid", "diffusion must be positive");

  const std::size_t nf = static_cast<std::size_t>(grid.nx);
  const std::size_t n = nf - 2;
  const double dx = 2.0 * grid.x_bd / static_cast<double>(nf - 1);
  int nt = grid.nt;
  if (nt == 0) nt = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dx - 1e-9)));
  const double dt = (t1 - t0) / nt;

  FpeResult res;
  res.nt = nt;
  res.x.resize(nf);
  for (std::size_t i = 0; i < nf; ++i) res.x[i] = -grid.x_bd + dx * static_cast<double>(i);
  std::vector<double> faces(nf - 1);
  for (std::size_t k = 0; k + 1 < nf; ++k) faces[k] = res.x[k] + 0.5 * dx;

  std::vector<double> u(n);
  double mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double z = res.x[k + 1] - grid.x0;
    u[k] = std::exp(-0.5 * z * z / grid.var0);
    mass += u[k];
  }
  for (double& v : u) v /= mass * dx;
  mass = 1.0;
  res.mass.reserve(static_cast<std::size_t>(nt) + 1);
  res.mass.push_back(mass);

  auto keep = [&](double t) {
    std::vector<double> full(nf, 0.0);
    std::copy(u.begin(), u.end(), full.begin() + 1);
    res.history_times.push_back(t);
    res.history.push_back(std::move(full));
  };
  if (grid.history_stride > 0) keep(t0);

  const double g = 2.0 - std::sqrt(2.0);
  const double w1 = 1.0 / (g * (2.0 - g));
  const double w0 = (1.0 - g) * (1.0 - g) / (g * (2.0 - g));

  std::vector<double> b(nf - 1);
  detail::Tridiag A_now, A_mid, A_new;
  auto assemble = [&](double t, detail::Tridiag& A) {
    for (std::size_t k = 0; k + 1 < nf; ++k) b[k] = drift(faces[k], t);
    detail::sg_operator(b.data(), nf, dx, diffusion, A);
  };
  std::vector<double> ustar(n), trial(n), work;

  // One TR-BDF2 step of size h from t applied to v.
  auto trbdf2 = [&](double t, double h, std::vector<double>& v) {
    assemble(t, A_now);
    assemble(t + g * h, A_mid);
    assemble(t + h, A_new);
    A_now.apply_shifted(0.5 * g * h, v.data(), ustar.data());
    A_mid.solve_shifted(0.5 * g * h, ustar.data(), work);
    for (std::size_t k = 0; k < n; ++k) v[k] = w1 * ustar[k] - w0 * v[k];
    A_new.solve_shifted((1.0 - g) / (2.0 - g) * h, v.data(), work);
  };
  auto min_of = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };

  double min_u = 0.0;
  for (int step = 0; step < nt; ++step) {
    double t = t0 + step * dt;
    if (step == 0) {
      // Rannacher start: implicit Euler quarter steps damp the jump of the
      // initial data against the absorbing ends, which TR would let ring.
      for (int j = 1; j <= 4; ++j) {
        assemble(t + 0.25 * j * dt, A_new);
        A_new.solve_shifted(0.25 * dt, u.data(), work);
      }
    } else {
      // TR-BDF2 is not positivity preserving at large Courant numbers; a step
      // that undershoots is redone with substeps.
      int sub = 1;
      for (;;) {
        trial = u;
        double h = dt / sub;
        for (int j = 0; j < sub; ++j) trbdf2(t + j * h, h, trial);
        if (min_of(trial) >= -1e-10 || sub >= 64) break;
        sub *= 2;
      }
      std::swap(u, trial);
    }

    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      m += u[k];
      min_u = std::min(min_u, u[k]);
    }
    m *= dx;
    if (min_u < -1e-8)
      fail_numerical("discretization-failure",
                     "negative density " + std::to_string(min_u) + " at t = " + std::to_string(t + dt));
    if (m > mass + 1e-8 || !std::isfinite(m))
      fail_numerical("discretization-failure", "mass grew at t = " + std::to_string(t + dt));
    mass = m;
    res.mass.push_back(mass);
    if (grid.history_stride > 0 && (step + 1) % grid.history_stride == 0) keep(t + dt);
  }
  res.min_density = min_u;
  res.final_density.assign(nf, 0.0);
  std::copy(u.begin(), u.end(), res.final_density.begin() + 1);
  res.P_esc = std::clamp(1.0 - mass, 0.0, 1.0);
  return res;
}

FpeResult solve_fpe_1d(double p0, double p2, const FpeGrid1D& grid) {
  if (!(p2 > 0.0)) fail_validation("invalid-grid", "p2 must be positive");
  double T0 = std::isnan(grid.T0) ? default_T0(p0, p2, grid.x0) : grid.T0;
  auto drift = [p0, p2](double x, double t) { return p0 - p2 * t * t + x * x; };
  FpeResult r = solve_fpe_1d_drift(drift, -T0, T0, grid, 1.0);
  r.T0 = T0;
  return r;
}

}  // namespace tipping
