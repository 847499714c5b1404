// Acceptance runner: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion; the exit status is nonzero if any selected criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "tipping/error.hpp"
#include "tipping/escape_grid.hpp"
#include "tipping/fpe1d.hpp"
#include "tipping/fpe2d.hpp"
#include "tipping/mode.hpp"
#include "tipping/monsoon.hpp"
#include "tipping/monte_carlo.hpp"
#include "tipping/tipping_det.hpp"

using namespace tipping;
namespace m = tipping::monsoon;

namespace {

// Tolerances and budgets, pinned here rather than read from anywhere.
constexpr double kAbTarget = 0.5287, kAbTol = 5e-4;
constexpr double kDbTarget = 318.36, kDbTol = 3.0;
constexpr double kFoldSeconds = 5.0;
constexpr double kYears30Tol = 2.0, kYears15Tol = 1.5;
constexpr double kBandTol = 0.002;
constexpr double kScenarioSeconds = 30.0;
constexpr double kCurveSmallR = 0.01, kCurveRelErr = 0.15;
constexpr double kCurveSeconds = 600.0;
constexpr double kC0 = 1.01, kC0Tol = 0.05, kC2 = 1.41, kC2Tol = 0.07;
constexpr double kFitSeconds = 60.0;
constexpr double kMcSe = 3.0, kModeTol = 0.05;
constexpr std::size_t kMcPaths = 100000;
constexpr double kProbeSeconds = 900.0;
constexpr double kMonsoonTol = 0.05;
constexpr int kMonsoonGrid = 256;
constexpr double kMonsoonSeconds = 1800.0;
constexpr double kDbRoutes = 1e-3, kSelfConv = 1e-3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool report(int id, bool ok, const std::string& what, double elapsed) {
  std::printf("%s criterion %d: %s [%.1f s]\n", ok ? "PASS" : "FAIL", id, what.c_str(), elapsed);
  std::fflush(stdout);
  return ok;
}

void info(const std::string& what) {
  std::printf("INFO %s\n", what.c_str());
  std::fflush(stdout);
}

std::string f(const char* fmt, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

// Sech^2 scenario with exceedance R lasting t_e (decades) over A_b.
ForcingProfile monsoon_family(double A_b, double R, double te) {
  double S = sech2_speed(R + A_b - m::kBackgroundAlbedo, A_b - m::kBackgroundAlbedo, te);
  return m::scenario(R, S, A_b).profile();
}

MonsoonProjection projection(const m::MonsoonParams& p) {
  Mat Delta = Mat::Zero(2, 2);
  Delta(0, 0) = 0.01;
  Delta(1, 1) = 3.0;
  return MonsoonProjection::from_fold(m::fold(p), Delta);
}

bool criterion1() {
  auto t0 = Clock::now();
  FoldPoint fp = m::fold(m::MonsoonParams::reference());
  double dt = seconds_since(t0);
  bool ok = std::abs(fp.q_b - kAbTarget) <= kAbTol && std::abs(fp.d_b - kDbTarget) <= kDbTol &&
            dt < kFoldSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf, "fold A_b=%.6f (target %.4f +- %.4f), d_b=%.3f (target %.2f +- %.0f)",
                fp.q_b, kAbTarget, kAbTol, fp.d_b, kDbTarget, kDbTol);
  return report(1, ok, buf, dt);
}

bool criterion2() {
  auto t0 = Clock::now();
  double y1 = 10.0 * critical_exceedance_time(kDbTarget, 0.005);
  double y2 = 10.0 * critical_exceedance_time(kDbTarget, 0.02);
  bool ok = std::abs(y1 - 30.0) <= kYears30Tol && std::abs(y2 - 15.0) <= kYears15Tol;
  char buf[256];
  std::snprintf(buf, sizeof buf, "critical t_e %.2f yr at R=0.005 (30 +- 2), %.2f yr at R=0.02 (15 +- 1.5)",
                y1, y2);
  return report(2, ok, buf, seconds_since(t0));
}

bool criterion3() {
  auto t0 = Clock::now();
  m::MonsoonParams p = m::MonsoonParams::reference();
  FoldPoint fp = m::fold(p);
  DynamicalSystem sys = m::make_system(p);
  auto tipped = [&](double R) {
    return classify_by_simulation(sys, m::scenario(R, 0.5, fp.q_b).profile(), m::escape_box(),
                                  m::default_guess())
        .tipped;
  };
  bool t1 = tipped(0.01), t2 = tipped(0.02), t3 = tipped(0.03);
  double te = m::exceedance_time_exact(m::scenario(0.027, 0.5, fp.q_b));
  double A_b = fp.q_b;
  ForcingFamily family = [A_b](double R, double t) { return monsoon_family(A_b, R, t); };
  CriticalCurveOptions o;
  o.R_tol = 1e-5;
  auto c = critical_curve(sys, family, {te}, fp.d_b, m::escape_box(), m::default_guess(), o);
  double Rc = c[0].ok ? c[0].R_crit : kNaN;
  double dt = seconds_since(t0);
  bool ok = !t1 && !t2 && t3 && std::abs(0.027 - Rc) <= kBandTol && dt < kScenarioSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "S=0.5 verdicts R=0.01:%s R=0.02:%s R=0.03:%s; R_crit(t_e=%.2f yr)=%.5f, |0.027-R_crit|=%.5f",
                t1 ? "tipped" : "safe", t2 ? "tipped" : "safe", t3 ? "tipped" : "safe", 10 * te, Rc,
                std::abs(0.027 - Rc));
  return report(3, ok, buf, dt);
}

bool criterion4() {
  auto t0 = Clock::now();
  m::MonsoonParams p = m::MonsoonParams::reference();
  FoldPoint fp = m::fold(p);
  double A_b = fp.q_b;
  ForcingFamily family = [A_b](double R, double t) { return monsoon_family(A_b, R, t); };
  std::vector<double> grid;
  for (int k = 0; k < 15; ++k) grid.push_back(1.0 + 3.0 * k / 14.0);
  auto pts = critical_curve(m::make_system(p), family, grid, fp.d_b, m::escape_box(),
                            m::default_guess());
  bool all_ok = true;
  std::vector<double> err;
  double worst_small = 0.0;
  for (const auto& c : pts) {
    all_ok = all_ok && c.ok;
    double e = std::abs(c.R_crit - c.R_asymptotic) / c.R_crit;
    err.push_back(e);
    if (c.R_crit <= kCurveSmallR) worst_small = std::max(worst_small, e);
    char buf[160];
    std::snprintf(buf, sizeof buf, "t_e=%.1f yr R_crit=%.6f R_asym=%.6f rel_err=%.4f", 10 * c.t_e,
                  c.R_crit, c.R_asymptotic, e);
    info(buf);
  }
  // Bins of three consecutive points, ordered by decreasing R_crit.
  bool monotone = true;
  double prev = INFINITY;
  for (std::size_t b = 0; b + 3 <= err.size(); b += 3) {
    double mean = (err[b] + err[b + 1] + err[b + 2]) / 3.0;
    monotone = monotone && mean < prev;
    prev = mean;
  }
  double dt = seconds_since(t0);
  bool ok = all_ok && monotone && worst_small < kCurveRelErr && dt < kCurveSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "critical curve 10-40 yr, 15 points: binned error %s, max rel err at R_crit<=0.01 = %.4f (< %.2f)",
                monotone ? "decreasing" : "NOT decreasing", worst_small, kCurveRelErr);
  return report(4, ok, buf, dt);
}

bool criterion5() {
  auto t0 = Clock::now();
  ModeFit fit = fit_mode_coefficients(fit_samples(-2.5, -0.1, 25));
  double dt = seconds_since(t0);
  ModeFit narrow = fit_mode_coefficients(fit_samples(-1.0, -0.1, 10));
  info("gamma1 fit over [-1, -0.1]: c0=" + f("%.4f", narrow.c0) + " c2=" + f("%.4f", narrow.c2));
  bool ok = std::abs(fit.c0 - kC0) <= kC0Tol && std::abs(fit.c2 - kC2) <= kC2Tol && dt < kFitSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "gamma1 fit over [-2.5, -0.1]: c0=%.4f (1.01 +- 0.05), c2=%.4f (1.41 +- 0.07), max residual %.3f",
                fit.c0, fit.c2, fit.max_residual);
  return report(5, ok, buf, dt);
}

bool criterion6() {
  auto t0 = Clock::now();
  // (R, t_e) over the threshold p0 = -1, spanning the exceedance plane used for the grids.
  const std::pair<double, double> probes[] = {{0.25, 1.0}, {0.5, 2.0}, {1.0, 3.0}, {1.5, 1.5},
                                              {2.0, 2.0}, {0.5, 4.5}, {3.0, 1.0}};
  RateModel exact = RateModel::tabulated();
  RateModel quoted = RateModel::quadratic(quoted_mode_fit());
  McOptions mc;
  mc.n_paths = kMcPaths;
  bool ok = true;
  int mode_checked = 0;
  for (auto [R, te] : probes) {
    auto [p0, p2] = canonical_from_exceedance(-1.0, R, te);
    double P = solve_fpe_1d(p0, p2).P_esc;
    McResult r = monte_carlo_escape(canonical_sde(p0, p2), mc);
    bool mc_ok = std::abs(P - r.P) <= kMcSe * r.se;
    ok = ok && mc_ok;
    std::string line = "p0=" + f("%.3f", p0) + " p2=" + f("%.4f", p2) + " P_fpe=" + f("%.5f", P) +
                       " P_mc=" + f("%.5f", r.P) + " se=" + f("%.5f", r.se) + (mc_ok ? "" : " [MC mismatch]");
    try {
      double Pm = mode_approx_canonical(p0, p2, exact).P;
      double Pq = mode_approx_canonical(p0, p2, quoted).P;
      bool mode_ok = std::abs(Pm - P) <= kModeTol;
      ok = ok && mode_ok;
      ++mode_checked;
      line += " P_mode=" + f("%.5f", Pm) + " P_mode_quoted_fit=" + f("%.5f", Pq) +
              (mode_ok ? "" : " [mode mismatch]");
    } catch (const TippingError& e) {
      line += " mode: " + e.code();
    }
    info(line);
  }
  double dt = seconds_since(t0);
  ok = ok && mode_checked >= 1 && dt < kProbeSeconds;
  return report(6, ok,
                "7 probes: |P_fpe - P_mc| <= 3 SE at 1e5 paths, |P_mode - P_fpe| <= 0.05 at " +
                    std::to_string(mode_checked) + " mode-valid probes",
                dt);
}

bool criterion7() {
  auto t0 = Clock::now();
  MonsoonGridSetup s;
  s.projection = projection(s.params);
  Fpe2dGrid g;
  g.nQ = g.nT = kMonsoonGrid;
  RateModel rate = RateModel::tabulated();
  // (R over 0.5, t_e in decades), inside the mode-validity region.
  const std::pair<double, double> nodes[] = {{0.005, 2.0}, {0.01, 2.0}, {0.02, 1.6}, {0.01, 3.0}};
  bool ok = true;
  int valid = 0;
  double worst = 0.0;
  for (auto [R, te] : nodes) {
    m::AlbedoForcing fo = monsoon_grid_forcing(s, R, te);
    ModeResult mr = mode_approx_monsoon(fo, s.projection, rate);
    if (!mr.valid) continue;
    ++valid;
    double P2 = solve_fpe_2d_monsoon(s.params, fo, s.D1, s.D2, g).P_esc;
    worst = std::max(worst, std::abs(mr.P - P2));
    info("R=" + f("%.4f", R) + " t_e=" + f("%.2f", te) + " dec P_mode=" + f("%.5f", mr.P) +
         " P_fpe2d=" + f("%.5f", P2));
  }
  double dt = seconds_since(t0);
  ok = valid >= 4 && worst < kMonsoonTol && dt < kMonsoonSeconds;
  return report(7, ok,
                std::to_string(valid) + " valid nodes at 256^2: max |P_mode - P_fpe2d| = " +
                    f("%.4f", worst) + " (< 0.05)",
                dt);
}

bool criterion8() {
  auto t0 = Clock::now();
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& name) {
    info(std::string(ok ? "ok   " : "FAIL ") + name);
    if (!ok) failed.push_back(name);
  };

  // FPE mass decay and nonnegativity, plus time self-convergence.
  bool mass = true, conv = true;
  for (auto [p0, p2] : {std::pair{0.0, 1.0}, {-1.0, 0.25}, {1.0, 2.0}, {-2.0, 0.5}}) {
    FpeGrid1D g;
    FpeResult r = solve_fpe_1d(p0, p2, g);
    for (std::size_t i = 1; i < r.mass.size(); ++i) mass = mass && r.mass[i] <= r.mass[i - 1] + 1e-12;
    mass = mass && r.mass.front() <= 1.0 + 1e-8 && r.min_density >= -1e-10;
    g.nt = 2 * r.nt;
    conv = conv && std::abs(solve_fpe_1d(p0, p2, g).P_esc - r.P_esc) < kSelfConv;
  }
  check(mass, "1D FPE mass non-increasing and density nonnegative");
  check(conv, "1D FPE halved time step changes P_esc by < 1e-3");

  // Monotonicity in p0 and p2 on a grid.
  bool mono = true;
  const double p0s[] = {-2.0, -1.0, 0.0, 0.5}, p2s[] = {0.25, 0.5, 1.0, 2.0};
  double P[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) P[i][j] = solve_fpe_1d(p0s[i], p2s[j]).P_esc;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i > 0) mono = mono && P[i][j] >= P[i - 1][j];
      if (j > 0) mono = mono && P[i][j] <= P[i][j - 1];
    }
  check(mono, "P_esc nondecreasing in p0 and nonincreasing in p2");

  bool crit = true;
  for (double R = 0.0; R < 0.05; R += 0.001)
    for (double te = 0.1; te < 5.0; te += 0.1) {
      auto a = criterion_inverse_square(kDbTarget, R, te);
      crit = crit && a.margin >= criterion_inverse_square(kDbTarget, R + 0.001, te).margin &&
             a.margin >= criterion_inverse_square(kDbTarget, R, te + 0.1).margin;
    }
  check(crit, "inverse-square margin monotone in R and t_e");

  FoldPoint fp = m::fold(m::MonsoonParams::reference());
  check(std::abs(fp.d_b - fp.d_b_limit) / fp.d_b <= kDbRoutes,
        "d_b from coefficients and from the decay-rate limit agree within 0.1% (" +
            f("%.6f", std::abs(fp.d_b - fp.d_b_limit) / fp.d_b) + ")");

  // Normal form at eps = 1e-3: simulated verdict equals the criterion outside the band.
  DynamicalSystem nf;
  nf.dim = 1;
  nf.rhs = [](const Vec& y, double q) { return Vec(Vec::Constant(1, q + y[0] * y[0])); };
  nf.w = Vec::Ones(1);
  Box box{Vec::Constant(1, -100.0), Vec::Constant(1, 100.0)};
  bool equiv = true;
  for (double R2 : {0.5, 1.0, 2.0})
    for (double ratio : {0.5, 0.9, 0.98, 1.02, 1.1, 1.5}) {
      double R0 = ratio * std::sqrt(R2);
      ParabolicForcing pf{R0, R2, 1e-3, 0.0};
      ForcingProfile prof(pf);
      double q0 = prof.value(prof.natural_span().first);
      bool sim = classify_by_simulation(nf, prof, box, Vec::Constant(1, -std::sqrt(-q0))).tipped;
      bool cr = criterion_inverse_square(4.0, 1e-3 * R0, parabolic_exceedance_time(pf)).tipped;
      equiv = equiv && sim == cr;
    }
  check(equiv, "normal-form simulation matches the criterion at eps = 1e-3 outside the band");

  McOptions mo;
  mo.n_paths = 4000;
  mo.seed = 7;
  mo.workers = 1;
  McResult a = monte_carlo_escape(canonical_sde(0.0, 1.0), mo);
  mo.workers = 2;
  McResult b = monte_carlo_escape(canonical_sde(0.0, 1.0), mo);
  check(a.absorbed == b.absorbed && a.P == b.P, "Monte Carlo reproducible under a fixed seed");

  // 2D self-convergence at one node on a 128^2 grid.
  MonsoonGridSetup s;
  s.projection = projection(s.params);
  m::AlbedoForcing fo = monsoon_grid_forcing(s, 0.01, 2.0);
  Fpe2dGrid g2;
  g2.nQ = g2.nT = 128;
  Fpe2dResult r1 = solve_fpe_2d_monsoon(s.params, fo, s.D1, s.D2, g2);
  g2.dt *= 0.5;
  Fpe2dResult r2 = solve_fpe_2d_monsoon(s.params, fo, s.D1, s.D2, g2);
  check(std::abs(r1.P_esc - r2.P_esc) < kSelfConv && r1.min_density >= -1e-10,
        "2D FPE halved time step changes P_esc by < 1e-3 (" + f("%.2e", std::abs(r1.P_esc - r2.P_esc)) + ")");

  return report(8, failed.empty(),
                failed.empty() ? "all property suites hold" : std::to_string(failed.size()) + " property suite(s) failed",
                seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N]\n");
      return 2;
    }
  }
  const std::function<bool()> criteria[] = {criterion1, criterion2, criterion3, criterion4,
                                            criterion5, criterion6, criterion7, criterion8};
  bool all = true;
  for (int k = 1; k <= 8; ++k) {
    if (only != 0 && only != k) continue;
    try {
      all = criteria[k - 1]() && all;
    } catch (const std::exception& e) {
      report(k, false, std::string("exception: ") + e.what(), 0.0);
      all = false;
    }
  }
  return all ? 0 : 1;
}
