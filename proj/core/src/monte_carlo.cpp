#include "tipping/monte_carlo.hpp"

#include <atomic>
#include <cmath>

#include "tipping/error.hpp"
#include "tipping/fpe1d.hpp"
#include "tipping/parallel.hpp"

namespace tipping {

void SdeSpec::validate() const {
  Violations v;
  const auto n = static_cast<std::size_t>(dim);
  v.check(dim >= 1, "dim must be >= 1");
  v.check(static_cast<bool>(drift), "drift must be set");
  v.check(static_cast<bool>(initial), "initial sampler must be set");
  v.check(noise_variance.size() == n, "noise_variance must have dim entries");
  v.check(lo.size() == n && hi.size() == n, "box bounds must have dim entries");
  v.check(t1 > t0, "window must be nonempty");
  v.check(warmup >= 0.0, "warmup must be >= 0");
  for (double d : noise_variance) v.check(d >= 0.0, "noise variances must be >= 0");
  v.throw_if_any("invalid-sde");
}

namespace {

std::mt19937_64 batch_rng(std::uint64_t seed, std::size_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
  return std::mt19937_64(seq);
}

bool inside(const SdeSpec& s, const double* y) {
  for (std::size_t i = 0; i < static_cast<std::size_t>(s.dim); ++i)
    if (!(y[i] >= s.lo[i] && y[i] <= s.hi[i])) return false;  // NaN counts as outside
  return true;
}

}  // namespace

McResult monte_carlo_escape(const SdeSpec& sde, const McOptions& opts) {
  sde.validate();
  Violations v;
  v.check(opts.n_paths >= 1000, "n_paths must be >= 1000");
  v.check(opts.dt > 0.0, "dt must be positive");
  v.check(opts.batch >= 1, "batch must be >= 1");
  v.throw_if_any("invalid-mc");

  const std::size_t dim = static_cast<std::size_t>(sde.dim);
  const std::size_t nb = (opts.n_paths + opts.batch - 1) / opts.batch;
  const int steps = std::max(1, static_cast<int>(std::ceil((sde.t1 - sde.t0) / opts.dt - 1e-9)));
  const double dt = (sde.t1 - sde.t0) / steps;
  const int warm_steps = sde.warmup > 0.0 ? static_cast<int>(std::ceil(sde.warmup / opts.dt - 1e-9)) : 0;
  const double dtw = warm_steps ? sde.warmup / warm_steps : 0.0;

  std::vector<std::size_t> absorbed(nb, 0), entered(nb, 0), discarded(nb, 0);
  parallel_for(
      nb,
      [&](std::size_t b) {
        std::mt19937_64 rng = batch_rng(opts.seed, b);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> y(dim), f(dim), amp(dim), ampw(dim);
        for (std::size_t i = 0; i < dim; ++i) {
          amp[i] = std::sqrt(2.0 * sde.noise_variance[i] * dt);
          ampw[i] = std::sqrt(2.0 * sde.noise_variance[i] * dtw);
        }
        const std::size_t first = b * opts.batch;
        const std::size_t count = std::min(opts.batch, opts.n_paths - first);
        for (std::size_t p = 0; p < count; ++p) {
          sde.initial(rng, y.data());
          bool alive = true;
          for (int k = 0; k < warm_steps && alive; ++k) {
            sde.drift(sde.t0, y.data(), f.data());
            for (std::size_t i = 0; i < dim; ++i) y[i] += f[i] * dtw + ampw[i] * normal(rng);
            alive = inside(sde, y.data());
          }
          if (!alive) {
            ++discarded[b];
            continue;
          }
          ++entered[b];
          for (int k = 0; k < steps; ++k) {
            double t = sde.t0 + k * dt;
            sde.drift(t, y.data(), f.data());
            for (std::size_t i = 0; i < dim; ++i) y[i] += f[i] * dt + amp[i] * normal(rng);
            if (!inside(sde, y.data())) {
              ++absorbed[b];
              break;
            }
          }
        }
      },
      opts.workers);

  McResult r;
  for (std::size_t b = 0; b < nb; ++b) {
    r.absorbed += absorbed[b];
    r.n_paths += entered[b];
    r.discarded += discarded[b];
  }
  if (r.n_paths == 0) fail_numerical("integration-failure", "every path was absorbed during warm-up");
  r.P = static_cast<double>(r.absorbed) / static_cast<double>(r.n_paths);
  r.se = std::sqrt(r.P * (1.0 - r.P) / static_cast<double>(r.n_paths));
  return r;
}

SdeSpec canonical_sde(double p0, double p2, double T0, double x_bd, double x0, double var0) {
  if (!(p2 > 0.0)) fail_validation("invalid-sde", "p2 must be positive");
  if (T0 <= 0.0) T0 = default_T0(p0, p2, x0);
  SdeSpec s;
  s.dim = 1;
  s.drift = [p0, p2](double t, const double* y, double* f) { f[0] = p0 - p2 * t * t + y[0] * y[0]; };
  s.noise_variance = {1.0};
  s.lo = {-x_bd};
  s.hi = {x_bd};
  s.t0 = -T0;
  s.t1 = T0;
  const double sd = std::sqrt(var0);
  s.initial = [x0, sd, x_bd](std::mt19937_64& rng, double* y) {
    std::normal_distribution<double> n(x0, sd);
    do y[0] = n(rng);
    while (!(y[0] > -x_bd && y[0] < x_bd));
  };
  return s;
}

SdeSpec monsoon_sde(const monsoon::MonsoonParams& p, const monsoon::AlbedoForcing& forcing,
                    double D1, double D2, double warmup) {
  DynamicalSystem sys = monsoon::make_system(p);
  Vec y0 = find_equilibrium(sys, monsoon::albedo(0.0, forcing), monsoon::default_guess());
  Box box = monsoon::escape_box();
  SdeSpec s;
  s.dim = 2;
  s.drift = [p, forcing](double t, const double* y, double* f) {
    monsoon::Tendency d = monsoon::monsoon_rhs(y[0], y[1], monsoon::albedo(t, forcing), p);
    f[0] = d.dQ;
    f[1] = d.dT;
  };
  s.noise_variance = {D1, D2};
  s.lo = {box.lo[0], box.lo[1]};
  s.hi = {box.hi[0], box.hi[1]};
  s.t0 = 0.0;
  s.t1 = forcing.t_end;
  s.warmup = warmup;
  const double q0 = y0[0], t0 = y0[1];
  s.initial = [q0, t0](std::mt19937_64&, double* y) {
    y[0] = q0;
    y[1] = t0;
  };
  return s;
}

std::vector<double> sample_output_series(const AutonomousDrift& drift, const Vec& w, const Vec& D,
                                         const Vec& y_start, double dt_sample, std::size_t n,
                                         int substeps, std::uint64_t seed, double burn_in) {
  Violations v;
  v.check(static_cast<bool>(drift), "drift must be set");
  v.check(D.size() == w.size() && y_start.size() == w.size(), "noise, weights and state sizes differ");
  v.check(dt_sample > 0.0 && substeps >= 1, "need dt_sample > 0 and substeps >= 1");
  v.throw_if_any("invalid-sde");
  const std::size_t dim = static_cast<std::size_t>(w.size());
  std::mt19937_64 rng = batch_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double h = dt_sample / substeps;
  std::vector<double> y(y_start.data(), y_start.data() + dim), f(dim), amp(dim);
  for (std::size_t i = 0; i < dim; ++i) amp[i] = std::sqrt(2.0 * D[static_cast<Eigen::Index>(i)] * h);
  auto step = [&] {
    drift(y.data(), f.data());
    for (std::size_t i = 0; i < dim; ++i) y[i] += f[i] * h + amp[i] * normal(rng);
  };
  const auto burn = static_cast<std::size_t>(std::ceil(burn_in / h));
  for (std::size_t k = 0; k < burn; ++k) step();
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (int s = 0; s < substeps; ++s) step();
    double o = 0.0;
    for (std::size_t i = 0; i < dim; ++i) o += w[static_cast<Eigen::Index>(i)] * y[i];
    out.push_back(o);
  }
  return out;
}

std::vector<double> sample_output_series(const DynamicalSystem& sys, double q, const Vec& D,
                                         const Vec& y_start, double dt_sample, std::size_t n,
                                         int substeps, std::uint64_t seed, double burn_in) {
  sys.validate();
  auto drift = [&sys, q](const double* y, double* f) {
    Vec yy = Eigen::Map<const Vec>(y, sys.dim);
    Vec ff = sys(yy, q);
    std::copy(ff.data(), ff.data() + sys.dim, f);
  };
  return sample_output_series(drift, sys.w, D, y_start, dt_sample, n, substeps, seed, burn_in);
}

std::vector<double> sample_monsoon_series(const monsoon::MonsoonParams& p, double A_sys,
                                          const Vec& w, const Vec& D, double dt_sample,
                                          std::size_t n, int substeps, std::uint64_t seed) {
  DynamicalSystem sys = monsoon::make_system(p, w);
  Vec y0 = find_equilibrium(sys, A_sys, monsoon::default_guess());
  auto drift = [&p, A_sys](const double* y, double* f) {
    monsoon::Tendency d = monsoon::monsoon_rhs(y[0], y[1], A_sys, p);
    f[0] = d.dQ;
    f[1] = d.dT;
  };
  return sample_output_series(drift, w, D, y0, dt_sample, n, substeps, seed);
}

}  // namespace tipping
