#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "context.hpp"
#include "tipping/error.hpp"
#include "tipping/io.hpp"
#include "tipping/mode.hpp"
#include "tipping/normal_form.hpp"

namespace kit {

using namespace tipping;

namespace {

// y' = q + y^2: stable branch -sqrt(-q) for q < 0, fold at q = 0 with d_b = 4.
DynamicalSystem normal_form_system() {
  DynamicalSystem s;
  s.dim = 1;
  s.rhs = [](const Vec& y, double q) {
    Vec f(1);
    f[0] = q + y[0] * y[0];
    return f;
  };
  s.w = Vec::Ones(1);
  return s;
}

Box normal_form_box() {
  Box b;
  b.lo = Vec::Constant(1, -100.0);
  b.hi = Vec::Constant(1, 100.0);
  return b;
}

bool given(double v) { return !std::isnan(v); }

void add_system(CLI::App* sub, std::string& system, const std::vector<std::string>& choices) {
  sub->add_option("--system", system, "Model")->check(CLI::IsMember(choices))->capture_default_str();
}

void print(const std::string& line) { std::cout << line << std::endl; }

json fpe_json(const FpeResult& r, double p0, double p2, const FpeGrid1D& g) {
  return {{"p0", p0},         {"p2", p2},
          {"P_esc", r.P_esc}, {"T0", r.T0},
          {"nt", r.nt},       {"nx", g.nx},
          {"x_bd", g.x_bd},   {"final_mass", r.mass.back()},
          {"min_density", r.min_density}};
}

std::vector<double> read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_validation("invalid-input", "cannot read series file " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto pos = line.find_last_of(',');
    std::string cell = pos == std::string::npos ? line : line.substr(pos + 1);
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) continue;  // header
    out.push_back(v);
  }
  return out;
}

}  // namespace

MonsoonGridSetup monsoon_grid_setup(const Context& ctx, double threshold, double D1, double D2) {
  MonsoonGridSetup s;
  s.params = ctx.params();
  s.projection = monsoon_projection(s.params, D1, D2);
  s.threshold = threshold;
  s.D1 = D1;
  s.D2 = D2;
  return s;
}

monsoon::AlbedoForcing monsoon_scenario(double A_b, double R, double S, double t_e) {
  if (!given(S)) S = sech2_speed(R + A_b - monsoon::kBackgroundAlbedo,
                                 A_b - monsoon::kBackgroundAlbedo, t_e);
  return monsoon::scenario(R, S, A_b);
}

Trajectory monsoon_trajectory(const monsoon::MonsoonParams& p, const monsoon::AlbedoForcing& f,
                              double tol) {
  DynamicalSystem sys = monsoon::make_system(p);
  ForcingProfile prof = f.profile();
  Vec y0 = find_equilibrium(sys, prof.value(0.0), monsoon::default_guess());
  IntegrateOptions io;
  io.box = monsoon::escape_box();
  return integrate(sys, y0, 0.0, f.t_end, prof, tol, io);
}

void register_commands(CLI::App& app, Context& ctx) {
  // fold
  {
    auto* sub = app.add_subcommand("fold", "Locate the fold and its normal-form coefficients");
    auto system = std::make_shared<std::string>("monsoon");
    auto out = std::make_shared<std::string>();
    auto branches = std::make_shared<std::string>();
    add_system(sub, *system, {"monsoon", "normal-form"});
    sub->add_option("-o,--output", *out, "FoldPoint JSON path (default fold.json)");
    sub->add_option("--branches", *branches,
                    "Also write equilibrium branches A_sys,Q_a,T_a,stable to this CSV (monsoon)");
    ctx.handlers.emplace_back(sub, [&ctx, system, out, branches] {
      FoldPoint f;
      if (*system == "monsoon") {
        monsoon::MonsoonParams p = ctx.params();
        f = monsoon::fold(p);
        if (!branches->empty())
          ctx.write(*branches, io::branches_csv(monsoon::equilibrium_branches(p, 0.40, f.q_b)));
      } else {
        DynamicalSystem sys = normal_form_system();
        f = normal_form_coefficients(sys, locate_fold(sys, -1.0, 1.0, Vec::Constant(1, -1.0)));
      }
      ctx.write(ctx.output(*out, "fold.json"), io::fold_json(f));
      print("system=" + *system + " q_b=" + fmt(f.q_b) + " d_b=" + fmt(f.d_b) +
            " d_b_limit=" + fmt(f.d_b_limit) + " a0=" + fmt(f.a0) + " kappa=" + fmt(f.kappa));
    });
  }

  // criterion
  {
    auto* sub = app.add_subcommand("criterion", "Deterministic tipping criterion verdict");
    struct Args {
      std::string method = "inverse-square", out;
      double db = kNaN, R = kNaN, te = kNaN, q_peak = kNaN, q_ddot = kNaN, q_b = kNaN;
    };
    auto a = std::make_shared<Args>();
    sub->add_option("--method", a->method, "inverse-square or acceleration")
        ->check(CLI::IsMember({"inverse-square", "acceleration"}))
        ->capture_default_str();
    sub->add_option("--db", a->db, "d_b in decades^-2 (default: monsoon fold)");
    sub->add_option("--R", a->R, "Exceedance amplitude over the fold");
    sub->add_option("--te", a->te, "Exceedance time (decades, or years with --years)");
    sub->add_option("--q-peak", a->q_peak, "Peak forcing value (acceleration method)");
    sub->add_option("--q-ddot", a->q_ddot, "Forcing second derivative at the peak (acceleration)");
    sub->add_option("--q-b", a->q_b, "Fold value (acceleration method)");
    sub->add_option("-o,--output", a->out, "Verdict JSON path (default verdict.json)");
    ctx.handlers.emplace_back(sub, [&ctx, a] {
      double db = given(a->db) ? a->db : monsoon::fold(ctx.params()).d_b;
      Violations v;
      v.check(db > 0.0, "--db must be positive");
      TippingVerdict verdict;
      std::string extra;
      if (a->method == "inverse-square") {
        v.check(given(a->R), "--R is required");
        v.check(given(a->te) && a->te > 0.0, "--te is required and must be positive");
        v.throw_if_any();
        double te = ctx.decades(a->te);
        verdict = criterion_inverse_square(db, a->R, te);
        if (a->R > 0.0)
          extra = " t_e_crit=" + fmt(ctx.display_time(critical_exceedance_time(db, a->R))) + " " +
                  ctx.time_unit();
        extra += " R_crit=" + fmt(critical_amplitude(db, te));
      } else {
        v.check(given(a->q_peak), "--q-peak is required");
        v.check(given(a->q_ddot), "--q-ddot is required");
        v.check(given(a->q_b), "--q-b is required");
        v.throw_if_any();
        double q_ddot = a->q_ddot;
        // q'' scales as 1/time^2
        if (ctx.years) q_ddot *= kYearsPerDecade * kYearsPerDecade;
        verdict = criterion_acceleration(a->q_peak, q_ddot, a->q_b, db);
      }
      ctx.write(ctx.output(a->out, "verdict.json"), io::verdict_json(verdict));
      print(std::string(verdict.tipped ? "verdict=tipped" : "verdict=safe") +
            " margin=" + fmt(verdict.margin) + " d_b=" + fmt(db) + extra);
    });
  }

  // exceedance
  {
    auto* sub = app.add_subcommand("exceedance", "Time a forcing profile spends above a threshold");
    struct Args {
      std::string forcing = "monsoon", out;
      double R = kNaN, S = 0.5, R0 = kNaN, R2 = 1.0, eps = 1.0, threshold = kNaN;
    };
    auto a = std::make_shared<Args>();
    sub->add_option("--forcing", a->forcing, "monsoon (sech^2 albedo) or parabolic")
        ->check(CLI::IsMember({"monsoon", "parabolic"}))
        ->capture_default_str();
    sub->add_option("--R", a->R, "Monsoon: peak albedo minus A_b");
    sub->add_option("--S", a->S, "Monsoon: speed parameter per decade")->capture_default_str();
    sub->add_option("--R0", a->R0, "Parabolic: q = eps R0 - eps^2 R2 t^2");
    sub->add_option("--R2", a->R2, "Parabolic curvature coefficient")->capture_default_str();
    sub->add_option("--eps", a->eps, "Parabolic time-scale separation")->capture_default_str();
    sub->add_option("--threshold", a->threshold, "Threshold (default: the fold value)");
    sub->add_option("-o,--output", a->out, "JSON path (default exceedance.json)");
    ctx.handlers.emplace_back(sub, [&ctx, a] {
      Violations v;
      json j;
      Exceedance e;
      if (a->forcing == "monsoon") {
        v.check(given(a->R), "--R is required");
        v.check(a->S > 0.0, "--S must be positive");
        v.throw_if_any();
        double A_b = monsoon::fold(ctx.params()).q_b;
        monsoon::AlbedoForcing f = monsoon::scenario(a->R, a->S, A_b);
        e = exceedance_time(f.profile(), given(a->threshold) ? a->threshold : A_b);
        if (!given(a->threshold)) j["t_e_approx"] = ctx.display_time(monsoon::exceedance_time_approx(f));
        j["t_end"] = ctx.display_time(f.t_end);
      } else {
        v.check(given(a->R0), "--R0 is required");
        v.check(a->R2 > 0.0, "--R2 must be positive");
        v.check(a->eps > 0.0, "--eps must be positive");
        v.throw_if_any();
        ParabolicForcing f{a->R0, a->R2, a->eps, 0.0};
        e = exceedance_time(ForcingProfile(f), given(a->threshold) ? a->threshold : 0.0);
      }
      j["t_e"] = ctx.display_time(e.t_e);
      j["exceeded"] = e.exceeded;
      j["t_enter"] = e.exceeded ? json(ctx.display_time(e.t_enter)) : json(nullptr);
      j["t_leave"] = e.exceeded ? json(ctx.display_time(e.t_leave)) : json(nullptr);
      j["unit"] = ctx.time_unit();
      ctx.write(ctx.output(a->out, "exceedance.json"), j.dump(2) + "\n");
      print("t_e=" + fmt(ctx.display_time(e.t_e)) + " " + ctx.time_unit());
    });
  }

  // classify
  {
    auto* sub = app.add_subcommand("classify", "Tipping verdict by direct simulation");
    struct Args {
      std::string system = "monsoon", out, traj;
      double R = kNaN, S = kNaN, te = kNaN, R0 = kNaN, R2 = 1.0, eps = 1e-3;
    };
    auto a = std::make_shared<Args>();
    add_system(sub, a->system, {"monsoon", "normal-form"});
    sub->add_option("--R", a->R, "Monsoon: peak albedo minus A_b");
    sub->add_option("--S", a->S, "Monsoon: sech^2 speed per decade");
    sub->add_option("--te", a->te, "Monsoon: exceedance time above A_b instead of --S");
    sub->add_option("--R0", a->R0, "Normal form: q = eps R0 - eps^2 R2 t^2");
    sub->add_option("--R2", a->R2, "Normal form curvature")->capture_default_str();
    sub->add_option("--eps", a->eps, "Normal form time-scale separation")->capture_default_str();
    sub->add_option("-o,--output", a->out, "Verdict JSON path (default verdict.json)");
    sub->add_option("--trajectory", a->traj, "Trajectory CSV path (default trajectory.csv)");
    ctx.handlers.emplace_back(sub, [&ctx, a] {
      Violations v;
      TippingVerdict verdict;
      Trajectory tr;
      double tol = ctx.integration_tol();
      if (a->system == "monsoon") {
        v.check(given(a->R), "--R is required");
        v.check(given(a->S) != given(a->te), "give exactly one of --S and --te");
        v.check(!given(a->S) || a->S > 0.0, "--S must be positive");
        v.check(!given(a->te) || a->te > 0.0, "--te must be positive");
        v.check(!given(a->R) || a->R > -0.05, "--R must keep the peak above the background albedo");
        v.throw_if_any();
        monsoon::MonsoonParams p = ctx.params();
        double A_b = monsoon::fold(p).q_b;
        monsoon::AlbedoForcing f =
            monsoon_scenario(A_b, a->R, a->S, given(a->te) ? ctx.decades(a->te) : kNaN);
        verdict = classify_by_simulation(monsoon::make_system(p), f.profile(), monsoon::escape_box(),
                                         monsoon::default_guess(), ctx.classify());
        tr = monsoon_trajectory(p, f, tol);
      } else {
        v.check(given(a->R0), "--R0 is required");
        v.check(a->R2 > 0.0, "--R2 must be positive");
        v.check(a->eps > 0.0, "--eps must be positive");
        v.throw_if_any();
        ForcingProfile f{ParabolicForcing{a->R0, a->R2, a->eps, 0.0}};
        DynamicalSystem sys = normal_form_system();
        auto [t0, t1] = f.natural_span();
        Vec guess = Vec::Constant(1, -std::sqrt(std::max(-f.value(t0), 1e-12)));
        verdict = classify_by_simulation(sys, f, normal_form_box(), guess, ctx.classify());
        IntegrateOptions io;
        io.box = normal_form_box();
        tr = integrate(sys, find_equilibrium(sys, f.value(t0), guess), t0, t1, f, tol, io);
      }
      ctx.write(ctx.output(a->out, "verdict.json"), io::verdict_json(verdict));
      ctx.write(ctx.output(a->traj, "trajectory.csv"), io::trajectory_csv(tr));
      print(std::string(verdict.tipped ? "verdict=tipped" : "verdict=safe") +
            " margin=" + fmt(verdict.margin));
    });
  }

  // critical-curve
  {
    auto* sub = app.add_subcommand("critical-curve", "Critical amplitude against exceedance time");
    struct Args {
      std::string system = "monsoon", out;
      double te_min = 1.0, te_max = 4.0, db = kNaN;
      int points = 15;
    };
    auto a = std::make_shared<Args>();
    add_system(sub, a->system, {"monsoon", "normal-form"});
    sub->add_option("--te-min", a->te_min, "Smallest exceedance time (decades, or years)")
        ->capture_default_str();
    sub->add_option("--te-max", a->te_max, "Largest exceedance time")->capture_default_str();
    sub->add_option("--points", a->points, "Number of t_e grid points")->capture_default_str();
    sub->add_option("--db", a->db, "d_b for the asymptote (default: computed fold)");
    sub->add_option("-o,--output", a->out, "CSV path (default critical_curve.csv)");
    ctx.handlers.emplace_back(sub, [&ctx, a] {
      Violations v;
      v.check(a->te_min > 0.0, "--te-min must be positive");
      v.check(a->te_max >= a->te_min, "--te-max must be >= --te-min");
      v.check(a->points >= 1, "--points must be >= 1");
      v.throw_if_any();
      std::vector<double> grid;
      double lo = ctx.decades(a->te_min), hi = ctx.decades(a->te_max);
      for (int i = 0; i < a->points; ++i)
        grid.push_back(a->points == 1 ? lo : lo + (hi - lo) * i / (a->points - 1));
      CriticalCurveOptions opts;
      opts.classify = ctx.classify();
      opts.workers = ctx.workers;
      std::vector<CriticalPoint> pts;
      if (a->system == "monsoon") {
        monsoon::MonsoonParams p = ctx.params();
        FoldPoint f = monsoon::fold(p);
        double db = given(a->db) ? a->db : f.d_b;
        double A_b = f.q_b;
        ForcingFamily family = [A_b](double R, double te) {
          return monsoon_scenario(A_b, R, kNaN, te).profile();
        };
        pts = critical_curve(monsoon::make_system(p), family, grid, db, monsoon::escape_box(),
                             monsoon::default_guess(), opts);
      } else {
        double db = given(a->db) ? a->db : 4.0;
        ForcingFamily family = [](double R, double te) {
          return ForcingProfile(ParabolicForcing{R, 4.0 * R / (te * te), 1.0, 0.0});
        };
        pts = critical_curve(normal_form_system(), family, grid, db, normal_form_box(),
                             Vec::Constant(1, -1.0), opts);
      }
      for (auto& p : pts) p.t_e = ctx.display_time(p.t_e);
      ctx.write(ctx.output(a->out, "critical_curve.csv"), io::critical_curve_csv(pts));
      int ok = 0;
      for (const auto& p : pts) ok += p.ok ? 1 : 0;
      print("points=" + std::to_string(pts.size()) + " solved=" + std::to_string(ok));
      for (const auto& p : pts)
        if (!p.ok) throw TippingError(ErrorKind::numerical, "bracket-failure",
                                      "no critical amplitude bracket at t_e = " + fmt(p.t_e));
    });
  }

  // fpe1d
  {
    auto* sub = app.add_subcommand("fpe1d", "Escape probability of the canonical SDE via its FPE");
    struct Args {
      double p0 = kNaN, p2 = kNaN, T0 = kNaN, x_bd = kNaN, x0 = kNaN;
      int nx = 0, nt = -1;
      std::string out, density;
    };
    auto a = std::make_shared<Args>();
    sub->add_option("--p0", a->p0, "Peak of p(t) = p0 - p2 t^2")->required();
    sub->add_option("--p2", a->p2, "Curvature, > 0")->required();
    sub->add_option("--nx", a->nx, "Grid points including the ends (default 801)");
    sub->add_option("--nt", a->nt, "Time steps (default: dt <= dx)");
    sub->add_option("--T0", a->T0, "Half window (default sqrt((x0^2 + p0)/p2))");
    sub->add_option("--x-bd", a->x_bd, "Domain half width (default 8)");
    sub->add_option("--x0", a->x0, "Initial Gaussian mean (default -4)");
    sub->add_option("-o,--output", a->out, "JSON path (default fpe1d.json)");
    sub->add_option("--density", a->density, "Also write the final density x,u to this CSV");
    ctx.handlers.emplace_back(sub, [&ctx, a] {
      FpeGrid1D g = ctx.fpe1d();
      if (a->nx > 0) g.nx = a->nx;
      if (a->nt >= 0) g.nt = a->nt;
      if (given(a->T0)) g.T0 = a->T0;
      if (given(a->x_bd)) g.x_bd = a->x_bd;
      if (given(a->x0)) g.x0 = a->x0;
      Violations v;
      v.check(a->p2 > 0.0, "--p2 must be positive");
      v.check(std::isfinite(a->p0), "--p0 must be finite");
      v.check(g.nx >= 5, "--nx must be at least 5");
      v.check(g.x_bd > 0.0, "--x-bd must be positive");
      v.throw_if_any();
      FpeResult r = solve_fpe_1d(a->p0, a->p2, g);
      ctx.write(ctx.output(a->out, "fpe1d.json"), fpe_json(r, a->p0, a->p2, g).dump(2) + "\n");
      if (!a->density.empty()) {
        std::ostringstream os;
        os << "x,u\n";
        for (std::size_t i = 0; i < r.x.size(); ++i)
          os << fmt(r.x[i]) << ',' << fmt(r.final_density[i]) << '\n';
        ctx.write(a->density, os.str());
      }
      print("P_esc=" + fmt(r.P_esc) + " T0=" + fmt(r.T0) + " nt=" + std::to_string(r.nt));
    });
  }

  // Shared option block for monsoon escape problems.
  struct MonsoonNode {
    double R = kNaN, te = kNaN, threshold = 0.5, D1 = 0.01, D2 = 3.0;
  };
  auto add_node = [](CLI::App* sub, MonsoonNode& n) {
    sub->add_option("--R", n.R, "Peak albedo above the threshold, R^(th)");
    sub->add_option("--te", n.te, "Time above the threshold (decades, or years)");
    sub->add_option("--threshold", n.threshold, "Albedo threshold")->capture_default_str();
    sub->add_option("--D1", n.D1, "Noise variance of Q_a")->capture_default_str();
    sub->add_option("--D2", n.D2, "Noise variance of T_a")->capture_default_str();
  };
  auto check_node = [](const MonsoonNode& n, Violations& v) {
    v.check(given(n.R) && n.R > 0.0, "--R is required and must be positive");
    v.check(given(n.te) && n.te > 0.0, "--te is required and must be positive");
    v.check(n.D1 >= 0.0 && n.D2 >= 0.0, "noise variances must be nonnegative");
  };

  // fpe2d
  {
    auto* sub = app.add_subcommand("fpe2d", "Escape probability of the 2D monsoon SDE via its FPE");
    struct Args {
      MonsoonNode node;
      int nq = 0;
      double dt = kNaN;
      std::string out;
    };
    auto a = std::make_shared<Args>();
    add_node(sub, a->node);
    sub->add_option("--n", a->nq, "Grid points per axis (default 256)");
    sub->add_option("--dt", a->dt, "Time step in decades (default 2e-3)");
    sub->add_option("-o,--output", a->out, "JSON path (default fpe2d.json)");
    ctx.handlers.emplace_back(sub, [&ctx, a, check_node] {
      Violations v;
      check_node(a->node, v);
      v.check(a->node.D1 > 0.0 && a->node.D2 > 0.0, "the 2D FPE needs positive noise variances");
      v.throw_if_any();
      MonsoonGridSetup s = monsoon_grid_setup(ctx, a->node.threshold, a->node.D1, a->node.D2);
      monsoon::AlbedoForcing f = monsoon_grid_forcing(s, a->node.R, ctx.decades(a->node.te));
      Fpe2dGrid g = ctx.fpe2d();
      if (a->nq > 0) g.nQ = g.nT = a->nq;
      if (given(a->dt)) g.dt = a->dt;
      Fpe2dResult r = solve_fpe_2d_monsoon(s.params, f, s.D1, s.D2, g);
      json j = {{"R", a->node.R},          {"t_e", a->node.te},
                {"unit", ctx.time_unit()}, {"threshold", a->node.threshold},
                {"P_esc", r.P_esc},        {"mass_final", r.mass_final},
                {"steps", r.steps},        {"min_density", r.min_density},
                {"t_end", ctx.display_time(f.t_end)}, {"nQ", g.nQ}, {"nT", g.nT}, {"dt", g.dt}};
      ctx.write(ctx.output(a->out, "fpe2d.json"), j.dump(2) + "\n");
      print("P_esc=" + fmt(r.P_esc) + " steps=" + std::to_string(r.steps));
    });
  }

  // mode
  {
    auto* sub = app.add_subcommand("mode", "Mode approximation of the escape probability");
    struct Args {
      std::string system = "canonical", rate, out, xbar, fit_out;
      double p0 = kNaN, p2 = kNaN, fit_lo = -1.0, fit_hi = -0.1;
      int fit_count = 10;
      bool fit = false;
      MonsoonNode node;
    };
    auto a = std::make_shared<Args>();
    add_system(sub, a->system, {"canonical", "monsoon"});
    sub->add_option("--p0", a->p0, "Canonical peak");
    sub->add_option("--p2", a->p2, "Canonical curvature");
    add_node(sub, a->node);
    sub->add_option("--rate", a->rate, "Escape-rate model: tabulated or quadratic")
        ->check(CLI::IsMember({"tabulated", "quadratic"}));
    sub->add_option("--xbar", a->xbar, "Also write the orbit s,xbar to this CSV");
    sub->add_flag("--fit", a->fit, "Refit -log gamma1 = c0 + c2 xbar^2 and write the ModeFit");
    sub->add_option("--fit-lo", a->fit_lo, "Fit range lower end")->capture_default_str();
    sub->add_option("--fit-hi", a->fit_hi, "Fit range upper end")->capture_default_str();
    sub->add_option("--fit-count", a->fit_count, "Fit samples")->capture_default_str();
    sub->add_option("--fit-output", a->fit_out, "ModeFit JSON path (default mode_fit.json)");
    sub->add_option("-o,--output", a->out, "JSON path (default mode.json)");
    ctx.handlers.emplace_back(sub, [&ctx, a, check_node] {
      if (a->fit) {
        Violations v;
        v.check(a->fit_lo < a->fit_hi && a->fit_hi < 0.0, "fit range must satisfy lo < hi < 0");
        v.check(a->fit_count >= 2, "--fit-count must be >= 2");
        v.throw_if_any();
        ModeFit fit = fit_mode_coefficients(fit_samples(a->fit_lo, a->fit_hi, a->fit_count));
        ctx.write(ctx.output(a->fit_out, "mode_fit.json"), io::mode_fit_json(fit));
        print("c0=" + fmt(fit.c0) + " c2=" + fmt(fit.c2) + " max_residual=" + fmt(fit.max_residual));
        if (!given(a->p0) && !given(a->node.R)) return;
      }
      RateModel rate = ctx.rate(a->rate);
      Violations v;
      std::optional<XbarTrajectory> orbit;
      json j;
      if (a->system == "canonical") {
        v.check(given(a->p0), "--p0 is required");
        v.check(given(a->p2) && a->p2 > 0.0, "--p2 is required and must be positive");
        v.throw_if_any();
        orbit = xbar_trajectory(a->p0, a->p2);
        j["p0"] = a->p0;
        j["p2"] = a->p2;
      } else {
        check_node(a->node, v);
        v.throw_if_any();
        MonsoonGridSetup s = monsoon_grid_setup(ctx, a->node.threshold, a->node.D1, a->node.D2);
        orbit = xbar_monsoon(monsoon_grid_forcing(s, a->node.R, ctx.decades(a->node.te)),
                             s.projection);
        j["R"] = a->node.R;
        j["t_e"] = a->node.te;
        j["unit"] = ctx.time_unit();
      }
      if (!a->xbar.empty()) {
        std::ostringstream os;
        os << "s,xbar\n";
        for (std::size_t i = 0; i < orbit->nodes().size(); ++i)
          os << fmt(orbit->nodes()[i]) << ',' << fmt(orbit->values()[i]) << '\n';
        ctx.write(a->xbar, os.str());
      }
      ModeResult m = mode_approx_probability(*orbit, rate);
      j["P"] = m.P;
      j["integral"] = m.integral;
      j["xbar_max"] = m.xbar_max;
      j["valid"] = m.valid;
      j["rate"] = rate.kind() == RateModel::Kind::tabulated ? "tabulated" : "quadratic";
      ctx.write(ctx.output(a->out, "mode.json"), j.dump(2) + "\n");
      print("P_mode=" + fmt(m.P) + " xbar_max=" + fmt(m.xbar_max));
    });
  }

  // mc
  {
    auto* sub = app.add_subcommand("mc", "Monte-Carlo escape probability (Euler-Maruyama)");
    struct Args {
      std::string system = "canonical", out;
      double p0 = kNaN, p2 = kNaN, dt = kNaN, warmup = 3.0;
      long long paths = -1;
      long long seed = -1;
      MonsoonNode node;
    };
    auto a = std::make_shared<Args>();
    add_system(sub, a->system, {"canonical", "monsoon"});
    sub->add_option("--p0", a->p0, "Canonical peak");
    sub->add_option("--p2", a->p2, "Canonical curvature");
    add_node(sub, a->node);
    sub->add_option("--paths", a->paths, "Number of paths (default 100000)");
    sub->add_option("--seed", a->seed, "Master seed");
    sub->add_option("--dt", a->dt, "Step (canonical units or decades; default 1e-3)");
    sub->add_option("--warmup", a->warmup, "Monsoon: relaxation at A(0) before the window, decades")
        ->capture_default_str();
    sub->add_option("-o,--output", a->out, "JSON path (default mc.json)");
    ctx.handlers.emplace_back(sub, [&ctx, a, check_node] {
      McOptions o = ctx.mc();
      if (a->paths >= 0) o.n_paths = static_cast<std::size_t>(a->paths);
      if (a->seed >= 0) o.seed = static_cast<std::uint64_t>(a->seed);
      if (given(a->dt)) o.dt = a->dt;
      Violations v;
      v.check(o.n_paths >= 1000, "--paths must be >= 1000");
      v.check(o.dt > 0.0, "--dt must be positive");
      SdeSpec sde;
      if (a->system == "canonical") {
        v.check(given(a->p0), "--p0 is required");
        v.check(given(a->p2) && a->p2 > 0.0, "--p2 is required and must be positive");
        v.throw_if_any();
        FpeGrid1D g = ctx.fpe1d();
        sde = canonical_sde(a->p0, a->p2, std::isnan(g.T0) ? 0.0 : g.T0, g.x_bd, g.x0, g.var0);
      } else {
        check_node(a->node, v);
        v.check(a->warmup >= 0.0, "--warmup must be nonnegative");
        v.throw_if_any();
        MonsoonGridSetup s = monsoon_grid_setup(ctx, a->node.threshold, a->node.D1, a->node.D2);
        sde = monsoon_sde(s.params, monsoon_grid_forcing(s, a->node.R, ctx.decades(a->node.te)),
                          s.D1, s.D2, a->warmup);
      }
      McResult r = monte_carlo_escape(sde, o);
      json j = {{"P", r.P},           {"se", r.se},     {"n_paths", r.n_paths},
                {"absorbed", r.absorbed}, {"discarded", r.discarded},
                {"seed", o.seed},     {"dt", o.dt}};
      ctx.write(ctx.output(a->out, "mc.json"), j.dump(2) + "\n");
      print("P_mc=" + fmt(r.P) + " se=" + fmt(r.se) + " paths=" + std::to_string(r.n_paths));
    });
  }

  // estimate-db
  {
    auto* sub = app.add_subcommand("estimate-db",
                                   "Estimate d_b from the lag-1 autocorrelation of an output series");
    struct Args {
      std::string input, out;
      double dt = 2e-3, q_c = 0.52, q_b = kNaN, noise = 0.01, q_peak = kNaN, te = kNaN;
      long long samples = 1000000, seed = 7;
      int substeps = 4;
    };
    auto a = std::make_shared<Args>();
    sub->add_option("--input", a->input,
                    "CSV series (last column used); without it a monsoon series is simulated");
    sub->add_option("--dt", a->dt, "Sampling interval in decades")->capture_default_str();
    sub->add_option("--q-c", a->q_c, "Forcing value at which the series was recorded")
        ->capture_default_str();
    sub->add_option("--q-b", a->q_b, "Fold value (default: monsoon fold)");
    sub->add_option("--noise", a->noise, "Simulation: multiplier on diag(0.01, 3)")
        ->capture_default_str();
    sub->add_option("--samples", a->samples, "Simulation: series length")->capture_default_str();
    sub->add_option("--substeps", a->substeps, "Simulation: Euler steps per sample")
        ->capture_default_str();
    sub->add_option("--seed", a->seed, "Simulation seed")->capture_default_str();
    sub->add_option("--q-peak", a->q_peak, "With --te: run the dimensionless check");
    sub->add_option("--te", a->te, "Exceedance time for the dimensionless check");
    sub->add_option("-o,--output", a->out, "JSON path (default estimate_db.json)");
    ctx.handlers.emplace_back(sub, [&ctx, a] {
      monsoon::MonsoonParams p = ctx.params();
      Violations v;
      v.check(a->dt > 0.0, "--dt must be positive");
      v.check(a->samples >= 100, "--samples must be >= 100");
      v.check(a->substeps >= 1, "--substeps must be >= 1");
      v.check(a->noise > 0.0, "--noise must be positive");
      v.check(given(a->q_peak) == given(a->te), "--q-peak and --te go together");
      v.throw_if_any();
      FoldPoint f;
      bool need_fold = !given(a->q_b) || a->input.empty();
      if (need_fold) f = monsoon::fold(p);
      double q_b = given(a->q_b) ? a->q_b : f.q_b;
      std::vector<double> series;
      if (!a->input.empty()) {
        series = read_series(a->input);
      } else {
        Vec D(2);
        D << 0.01 * a->noise, 3.0 * a->noise;
        series = sample_monsoon_series(p, a->q_c, f.w, D, a->dt,
                                       static_cast<std::size_t>(a->samples), a->substeps,
                                       static_cast<std::uint64_t>(a->seed));
      }
      DbEstimate e = estimate_db_from_series(series, a->dt, a->q_c, q_b);
      json j = {{"d", e.d}, {"autocorrelation", e.autocorrelation}, {"lambda", e.lambda},
                {"q_c", a->q_c}, {"q_b", q_b}, {"samples", series.size()}};
      if (need_fold) j["d_b_fold"] = f.d_b;
      std::string extra;
      if (given(a->te)) {
        TippingVerdict vd =
            dimensionless_check(e.autocorrelation, a->q_c, q_b, a->q_peak, ctx.decades(a->te), a->dt);
        j["verdict"] = json::parse(io::verdict_json(vd));
        extra = std::string(vd.tipped ? " verdict=tipped" : " verdict=safe");
      }
      ctx.write(ctx.output(a->out, "estimate_db.json"), j.dump(2) + "\n");
      print("d_est=" + fmt(e.d) + " a=" + fmt(e.autocorrelation) + extra);
    });
  }
}

}  // namespace kit
