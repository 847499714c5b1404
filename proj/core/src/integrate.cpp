#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <string>

#include "tipping/dynsys.hpp"
#include "tipping/error.hpp"

namespace tipping {

namespace odeint = boost::numeric::odeint;

Trajectory integrate(const DynamicalSystem& sys, const Vec& y0, double t0, double t1,
                     const ForcingProfile& forcing, double tol, const IntegrateOptions& opts) {
  if (!(t1 > t0)) fail_validation("invalid-span", "integration span must be nonempty");
  if (!(tol > 0.0)) fail_validation("invalid-tolerance", "tolerance must be positive");
  if (y0.size() != sys.dim) fail_validation("invalid-state", "initial state has wrong dimension");

  using State = std::vector<double>;
  const int n = sys.dim;
  Vec ybuf(n);
  auto rhs = [&](const State& x, State& dxdt, double t) {
    for (int i = 0; i < n; ++i) ybuf[i] = x[static_cast<std::size_t>(i)];
    Vec f = sys(ybuf, forcing.value(t));
    for (int i = 0; i < n; ++i) dxdt[static_cast<std::size_t>(i)] = f[i];
  };

  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  State x(y0.data(), y0.data() + n);
  double t = t0;
  double dt = opts.initial_step > 0.0 ? opts.initial_step : (t1 - t0) * 1e-4;
  const double min_step = opts.min_step_rel * std::max(1.0, std::abs(t1 - t0));

  std::vector<double> times{t0};
  std::vector<Vec> states{y0};
  Trajectory out;
  auto record = [&](double tt) {
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = x[static_cast<std::size_t>(i)];
    if (opts.record || tt == t1) {
      times.push_back(tt);
      states.push_back(y);
    }
    return y;
  };

  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > opts.max_steps)
      fail_numerical("integration-failure", "step budget exhausted at t = " + std::to_string(t));
    dt = std::min(dt, t1 - t);
    State xprev = x;
    double tprev = t;
    int rejects = 0;
    while (stepper.try_step(rhs, x, t, dt) == odeint::fail) {
      if (dt < min_step || ++rejects > 200)
        fail_numerical("integration-failure",
                       "step size underflow, last valid time t = " + std::to_string(t));
    }
    bool finite = true;
    for (double v : x) finite = finite && std::isfinite(v);
    if (!finite) {
      x = xprev;
      t = tprev;
      fail_numerical("integration-failure",
                     "non-finite state, last valid time t = " + std::to_string(tprev));
    }
    if (t1 - t < 1e-14 * std::max(1.0, std::abs(t1))) t = t1;
    Vec y = record(t);
    if (opts.box && !opts.box->contains(y)) {
      if (!opts.record) {
        times.push_back(t);
        states.push_back(y);
      }
      out.escaped = true;
      out.escape_time = t;
      break;
    }
  }

  out.times = std::move(times);
  out.states.resize(static_cast<Eigen::Index>(states.size()), n);
  for (std::size_t i = 0; i < states.size(); ++i)
    out.states.row(static_cast<Eigen::Index>(i)) = states[i].transpose();
  out.forcing_values.reserve(out.times.size());
  for (double tt : out.times) out.forcing_values.push_back(forcing.value(tt));
  return out;
}

}  // namespace tipping
