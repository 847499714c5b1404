#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tipping/escape_grid.hpp"
#include "tipping/fpe1d.hpp"
#include "tipping/fpe2d.hpp"
#include "tipping/monsoon.hpp"
#include "tipping/monte_carlo.hpp"
#include "tipping/tipping_det.hpp"

namespace kit {

namespace fs = std::filesystem;
using nlohmann::json;
namespace monsoon = tipping::monsoon;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kYearsPerDecade = 10.0;

// Options shared by every subcommand, plus the parsed config file.
struct Context {
  std::string config_path;
  std::string out_dir;
  std::string preset = "reference";
  unsigned workers = 0;
  bool years = false;
  json config = json::object();
  // Subcommand handlers, run after a successful parse.
  std::vector<std::pair<CLI::App*, std::function<void()>>> handlers;

  // Reads the config file and checks every known section in one pass.
  void load();

  monsoon::MonsoonParams params() const;
  tipping::FpeGrid1D fpe1d() const;
  tipping::Fpe2dGrid fpe2d() const;
  tipping::McOptions mc() const;
  tipping::ClassifyOptions classify() const;
  tipping::RateModel rate(const std::string& kind) const;
  double integration_tol() const;

  // t_e from the command line, converted to decades.
  double decades(double t_e) const { return years ? t_e / kYearsPerDecade : t_e; }
  double display_time(double decades) const { return years ? decades * kYearsPerDecade : decades; }
  std::string time_unit() const { return years ? "years" : "decades"; }

  fs::path output_dir() const;
  fs::path output(const std::string& explicit_path, const std::string& default_name) const;
  void write(const fs::path& path, const std::string& content) const;
  json settings() const;  // solver settings for manifests
};

// Projection data for the monsoon mode approximation with Delta = diag(D1, D2).
tipping::MonsoonProjection monsoon_projection(const monsoon::MonsoonParams& p, double D1,
                                              double D2);

// Grid setup for the monsoon escape problem at the context's parameter preset.
tipping::MonsoonGridSetup monsoon_grid_setup(const Context& ctx, double threshold, double D1,
                                             double D2);

// Fig. 1 style scenario: peak A_b + R with speed S, or with S chosen so that
// the time above A_b equals t_e (decades) when S is NaN.
monsoon::AlbedoForcing monsoon_scenario(double A_b, double R, double S, double t_e);

// Deterministic monsoon run from the stable state at A(0), recorded densely.
tipping::Trajectory monsoon_trajectory(const monsoon::MonsoonParams& p,
                                       const monsoon::AlbedoForcing& f, double tol);

std::string fmt(double v);

void register_commands(CLI::App& app, Context& ctx);
void register_reproduce(CLI::App& app, Context& ctx);

}  // namespace kit
