#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "context.hpp"
#include "tipping/error.hpp"
#include "tipping/io.hpp"
#include "tipping/mode.hpp"
#include "tipping/normal_form.hpp"
#include "tipping/parallel.hpp"

namespace kit {

using namespace tipping;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

// Collects outputs and bookkeeping for one figure.
class Run {
 public:
  Run(const Context& ctx, std::string figure, bool coarse, double budget)
      : ctx_(ctx), figure_(std::move(figure)), start_(Clock::now()) {
    dir_ = ctx.output_dir() / figure_;
    if (budget > 0.0)
      deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(budget));
    manifest_["figure"] = figure_;
    manifest_["version"] = kVersion;
    manifest_["coarse"] = coarse;
    manifest_["budget_seconds"] = budget > 0.0 ? json(budget) : json(nullptr);
    manifest_["settings"] = ctx.settings();
    manifest_["outputs"] = json::array();
    manifest_["grids"] = json::array();
    manifest_["checks"] = json::array();
  }

  bool out_of_time() const { return deadline_ && Clock::now() > *deadline_; }
  EscapeGridOptions grid_options() const {
    EscapeGridOptions o;
    o.fpe = ctx_.fpe1d();
    o.fpe2d = ctx_.fpe2d();
    o.mc = ctx_.mc();
    o.rate = ctx_.rate("");
    o.workers = ctx_.workers;
    o.deadline = deadline_;
    return o;
  }

  void write(const std::string& name, const std::string& content) {
    ctx_.write(dir_ / name, content);
    manifest_["outputs"].push_back(name);
  }

  void grid(const std::string& name, const EscapeGrid& g, const json& extra = json::object()) {
    write(name, io::escape_grid_csv(g));
    std::size_t done = 0;
    json skipped = json::array();
    for (const auto& n : g.nodes) {
      if (n.note == "budget-exceeded")
        skipped.push_back({n.axis1, n.axis2});
      else
        ++done;
    }
    json j = {{"file", name},        {"method", to_string(g.method)},
              {"axis1", g.axis1.size()}, {"axis2", g.axis2.size()},
              {"completed_nodes", done}, {"complete", g.complete},
              {"skipped_nodes", skipped}};
    j.update(extra);
    manifest_["grids"].push_back(j);
    complete_ = complete_ && g.complete;
  }

  void check(const json& j) { manifest_["checks"].push_back(j); }
  void note(const std::string& key, const json& value) { manifest_[key] = value; }
  void incomplete() { complete_ = false; }

  // Writes the manifest; a run that hit the budget reports it as an error.
  void finish() {
    double elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
    manifest_["complete"] = complete_;
    manifest_["elapsed_seconds"] = elapsed;
    ctx_.write(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    std::cout << "figure=" << figure_ << " outputs=" << manifest_["outputs"].size()
              << " complete=" << (complete_ ? "true" : "false") << " elapsed_s=" << fmt(elapsed)
              << " dir=" << dir_.string() << std::endl;
    if (!complete_)
      fail_numerical("budget-exceeded",
                     "time budget ran out; partial results and manifest in " + dir_.string());
  }

 private:
  const Context& ctx_;
  std::string figure_;
  fs::path dir_;
  Clock::time_point start_;
  std::optional<Clock::time_point> deadline_;
  json manifest_;
  bool complete_ = true;
};

void fig1(Run& run, const Context& ctx) {
  monsoon::MonsoonParams p = ctx.params();
  FoldPoint f = monsoon::fold(p);
  DynamicalSystem sys = monsoon::make_system(p);
  const double S = 0.5;
  struct Scenario {
    double R;
    const char* colour;
  };
  const Scenario scenarios[] = {
      {0.01, "green"}, {0.02, "pink"}, {0.027, "light-brown"}, {0.03, "bright-blue"}};
  json table = json::array();
  for (const auto& s : scenarios) {
    monsoon::AlbedoForcing a = monsoon::scenario(s.R, S, f.q_b);
    TippingVerdict v = classify_by_simulation(sys, a.profile(), monsoon::escape_box(),
                                              monsoon::default_guess(), ctx.classify());
    Trajectory tr = monsoon_trajectory(p, a, ctx.integration_tol());
    for (double& t : tr.times) t = ctx.display_time(t);
    run.write(std::string("fig1_") + s.colour + ".csv", io::trajectory_csv(tr));
    table.push_back({{"colour", s.colour},
                     {"R", s.R},
                     {"S", S},
                     {"t_e", ctx.display_time(monsoon::exceedance_time_exact(a))},
                     {"tipped", v.tipped},
                     {"margin", std::isfinite(v.margin) ? json(v.margin) : json(nullptr)}});
  }
  run.write("fig1_scenarios.json", json({{"unit", ctx.time_unit()}, {"scenarios", table}}).dump(2) + "\n");
  run.write("fig1_branches.csv", io::branches_csv(monsoon::equilibrium_branches(p, 0.40, f.q_b)));
}

void fig3(Run& run, const Context& ctx, bool coarse) {
  monsoon::MonsoonParams p = ctx.params();
  FoldPoint f = monsoon::fold(p);
  double A_b = f.q_b;
  ForcingFamily family = [A_b](double R, double te) {
    return monsoon_scenario(A_b, R, kNaN, te).profile();
  };
  CriticalCurveOptions opts;
  opts.classify = ctx.classify();
  opts.workers = ctx.workers;
  std::vector<CriticalPoint> pts;
  for (double te : linspace(1.0, 4.0, coarse ? 6 : 15)) {
    if (run.out_of_time()) {
      run.incomplete();
      break;
    }
    auto one = critical_curve(monsoon::make_system(p), family, {te}, f.d_b, monsoon::escape_box(),
                              monsoon::default_guess(), opts);
    pts.push_back(one.front());
  }
  for (auto& c : pts) c.t_e = ctx.display_time(c.t_e);
  run.write("fig3_critical_curve.csv", io::critical_curve_csv(pts));
  run.note("d_b", f.d_b);
  run.note("unit", ctx.time_unit());
}

void fig4(Run& run, const Context& ctx, bool coarse) {
  const double p0_th = -1.0;
  int n = coarse ? 20 : 50;
  auto R = linspace(3.0 / n, 3.0, n);
  auto te = linspace(1.0, 5.0, n);
  EscapeGridOptions o = run.grid_options();
  EscapeGrid fpe = escape_grid_1d(p0_th, R, te, EscapeMethod::fpe, o);
  run.grid("fig4_fpe.csv", fpe, {{"threshold", p0_th}});
  EscapeGrid mode = escape_grid_1d(p0_th, R, te, EscapeMethod::mode, o);
  run.grid("fig4_mode.csv", mode, {{"threshold", p0_th}});
  run.write("fig4_boundaries.csv", io::boundaries_csv(escape_boundaries_1d(p0_th, linspace(0.05, 3.0, 60), 1.0, 5.0)));

  // Spot check of the coarse grid against Monte Carlo at three nodes.
  McOptions mc = ctx.mc();
  mc.n_paths = std::min<std::size_t>(mc.n_paths, 20000);
  const std::pair<double, double> probes[] = {{1.0, 3.0}, {2.0, 2.0}, {0.5, 4.5}};
  for (auto [r, t] : probes) {
    if (run.out_of_time()) {
      run.incomplete();
      break;
    }
    auto [p0, p2] = canonical_from_exceedance(p0_th, r, t);
    double P_fpe = solve_fpe_1d(p0, p2, o.fpe).P_esc;
    McResult m = monte_carlo_escape(canonical_sde(p0, p2), mc);
    run.check({{"kind", "mc-spot-check"}, {"R", r}, {"t_e", t}, {"P_fpe", P_fpe}, {"P_mc", m.P},
               {"se", m.se}, {"within_3se", std::abs(P_fpe - m.P) <= 3.0 * m.se}});
  }
}

MonsoonGridSetup fig5_setup(const Context& ctx) { return monsoon_grid_setup(ctx, 0.5, 0.01, 3.0); }

void fig5(Run& run, const Context& ctx, bool coarse) {
  MonsoonGridSetup s = fig5_setup(ctx);
  int n = coarse ? 20 : 60;
  auto R = linspace(0.05 / n, 0.05, n);
  auto te = linspace(0.25, 4.0, n);
  EscapeGridOptions o = run.grid_options();
  run.grid("fig5_mode.csv", escape_grid_monsoon(s, R, te, EscapeMethod::mode, o),
           {{"threshold", s.threshold}, {"t_e_unit", "decades"}});
  run.write("fig5_boundaries.csv",
            io::boundaries_csv(escape_boundaries_monsoon(s, linspace(0.0025, 0.05, coarse ? 20 : 40), 0.25, 4.0)));

  // Cross sections at R = 0.02 and 0.03 with their forcing profiles.
  run.grid("fig5_sections.csv",
           escape_grid_monsoon(s, {0.02, 0.03}, linspace(0.25, 4.0, coarse ? 20 : 80),
                               EscapeMethod::mode, o),
           {{"threshold", s.threshold}, {"t_e_unit", "decades"}});
  const std::pair<double, double> profiles[] = {{0.02, 0.75}, {0.02, 2.5}, {0.03, 0.9}, {0.03, 3.0}};
  std::ostringstream os;
  os << "R,t_e,t,A_sys\n";
  for (auto [r, t] : profiles) {
    monsoon::AlbedoForcing f = monsoon_grid_forcing(s, r, t);
    ForcingProfile prof = f.profile();
    for (double tt : linspace(0.0, f.t_end, 200))
      os << fmt(r) << ',' << fmt(ctx.display_time(t)) << ',' << fmt(ctx.display_time(tt)) << ','
         << fmt(prof.value(tt)) << '\n';
  }
  run.write("fig5_profiles.csv", os.str());
  run.note("projection", {{"a0", s.projection.a0}, {"kappa", s.projection.kappa},
                          {"D", s.projection.D}, {"A_b", s.projection.A_b}});
}

void fig6(Run& run, const Context& ctx, bool coarse) {
  int n = coarse ? 20 : 50;
  auto q1 = linspace(0.1, 4.0, n);
  auto q2 = linspace(-2.0, 2.0, n);
  EscapeGridOptions o = run.grid_options();
  run.grid("fig6_fpe.csv", escape_grid_q(q1, q2, EscapeMethod::fpe, o));

  // Mode-validity boundary: largest q2 with xbar < 0 along the whole orbit.
  std::ostringstream os;
  os << "q1,q2_deterministic,q2_mode_valid\n";
  for (double a : linspace(0.1, 4.0, 40)) {
    auto valid = [a](double b) {
      auto [p0, p2] = q_inverse(a, b);
      try {
        return xbar_trajectory(p0, p2).valid();
      } catch (const TippingError&) {
        return false;
      }
    };
    double lo = -2.0, hi = 2.0, edge = kNaN;
    if (valid(lo) && !valid(hi)) {
      for (int k = 0; k < 40; ++k) {
        double mid = 0.5 * (lo + hi);
        (valid(mid) ? lo : hi) = mid;
      }
      edge = 0.5 * (lo + hi);
    }
    os << fmt(a) << ",0," << fmt(edge) << '\n';
  }
  run.write("fig6_boundaries.csv", os.str());
  (void)ctx;
}

void appendix_b(Run& run, const Context& ctx, bool coarse) {
  MonsoonGridSetup s = fig5_setup(ctx);
  int n = coarse ? 6 : 12;
  auto R = linspace(0.05 / n, 0.05, n);
  auto te = linspace(0.5, 4.0, n);
  EscapeGridOptions o = run.grid_options();
  if (coarse && !ctx.config.contains("fpe2d")) o.fpe2d.nQ = o.fpe2d.nT = 128;
  EscapeGrid mode = escape_grid_monsoon(s, R, te, EscapeMethod::mode, o);
  EscapeGrid fpe = escape_grid_monsoon(s, R, te, EscapeMethod::fpe2d, o);
  run.grid("appendixB_mode.csv", mode, {{"t_e_unit", "decades"}});
  run.grid("appendixB_fpe2d.csv", fpe,
           {{"t_e_unit", "decades"}, {"nQ", o.fpe2d.nQ}, {"nT", o.fpe2d.nT}});
  std::ostringstream os;
  os << "axis1,axis2,p_mode,p_fpe2d,difference\n";
  double worst = 0.0;
  for (std::size_t k = 0; k < fpe.nodes.size(); ++k) {
    const auto& a = mode.nodes[k];
    const auto& b = fpe.nodes[k];
    double d = a.valid && b.valid ? a.prob - b.prob : kNaN;
    if (std::isfinite(d)) worst = std::max(worst, std::abs(d));
    os << fmt(b.axis1) << ',' << fmt(b.axis2) << ',' << fmt(a.valid ? a.prob : kNaN) << ','
       << fmt(b.valid ? b.prob : kNaN) << ',' << fmt(d) << '\n';
  }
  run.write("appendixB_difference.csv", os.str());
  run.check({{"kind", "max-abs-difference-in-mode-region"}, {"value", worst}});
}

}  // namespace

void register_reproduce(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("reproduce", "Write the data tables behind a figure");
  struct Args {
    std::string figure;
    bool coarse = false;
    double budget = 0.0;
  };
  auto a = std::make_shared<Args>();
  sub->add_option("figure", a->figure, "fig1, fig3, fig4, fig5, fig6 or appendixB")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig3", "fig4", "fig5", "fig6", "appendixB"}));
  sub->add_flag("--coarse", a->coarse, "Reduced resolution (fig4: 20 x 20 grid)");
  sub->add_option("--budget", a->budget,
                  "Wall-clock budget in seconds; unfinished nodes are skipped (0: none)")
      ->capture_default_str();
  ctx.handlers.emplace_back(sub, [&ctx, a] {
    if (a->budget < 0.0) fail_validation("invalid-arguments", "--budget must be nonnegative");
    Run run(ctx, a->figure, a->coarse, a->budget);
    if (a->figure == "fig1") fig1(run, ctx);
    else if (a->figure == "fig3") fig3(run, ctx, a->coarse);
    else if (a->figure == "fig4") fig4(run, ctx, a->coarse);
    else if (a->figure == "fig5") fig5(run, ctx, a->coarse);
    else if (a->figure == "fig6") fig6(run, ctx, a->coarse);
    else appendix_b(run, ctx, a->coarse);
    run.finish();
  });
}

}  // namespace kit
