#include "context.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tipping/error.hpp"
#include "tipping/io.hpp"
#include "tipping/parallel.hpp"

namespace kit {

using tipping::Violations;

namespace {

const std::vector<std::string> kSections = {"params", "preset", "workers", "fpe1d", "fpe2d",
                                            "mc", "classify", "rate"};
const std::vector<std::string> kFpe1d = {"x_bd", "nx", "nt", "T0", "x0", "var0"};
const std::vector<std::string> kFpe2d = {"nQ", "nT", "Q_lo", "Q_hi", "T_lo", "T_hi",
                                         "dt", "relax_time", "relax_tol"};
const std::vector<std::string> kMc = {"n_paths", "dt", "seed", "batch"};
const std::vector<std::string> kClassify = {"tol", "return_distance"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void check_section(const json& cfg, const std::string& name, const std::vector<std::string>& keys,
                   Violations& v) {
  if (!cfg.contains(name)) return;
  const json& sec = cfg.at(name);
  if (!sec.is_object()) {
    v.check(false, "config section '" + name + "' must be an object");
    return;
  }
  for (const auto& [k, val] : sec.items()) {
    v.check(contains(keys, k), "unknown key '" + name + "." + k + "'");
    v.check(val.is_number(), "'" + name + "." + k + "' must be a number");
  }
}

template <class T>
void take(const json& cfg, const char* sec, const char* key, T& target) {
  if (cfg.contains(sec) && cfg.at(sec).contains(key)) target = cfg.at(sec).at(key).get<T>();
}

}  // namespace

void Context::load() {
  if (config_path.empty()) return;
  std::ifstream in(config_path);
  if (!in) tipping::fail_validation("invalid-config", "cannot read config file " + config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    config = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    tipping::fail_validation("invalid-config", e.what());
  }
  Violations v;
  if (!config.is_object()) {
    v.check(false, "config must be a JSON object");
    v.throw_if_any("invalid-config");
  }
  for (const auto& [k, val] : config.items()) v.check(contains(kSections, k), "unknown section '" + k + "'");
  check_section(config, "fpe1d", kFpe1d, v);
  check_section(config, "fpe2d", kFpe2d, v);
  check_section(config, "mc", kMc, v);
  check_section(config, "classify", kClassify, v);
  if (config.contains("preset")) {
    const json& p = config["preset"];
    v.check(p.is_string() && (p == "reference" || p == "table"),
            "'preset' must be \"reference\" or \"table\"");
  }
  if (config.contains("rate")) {
    const json& r = config["rate"];
    v.check(r.is_string() && (r == "tabulated" || r == "quadratic"),
            "'rate' must be \"tabulated\" or \"quadratic\"");
  }
  if (config.contains("workers"))
    v.check(config["workers"].is_number_unsigned(), "'workers' must be a nonnegative integer");
  if (config.contains("params")) v.check(config["params"].is_object(), "'params' must be an object");
  v.throw_if_any("invalid-config");

  // The parameter block is checked against the model table.
  monsoon::MonsoonParams probe;
  if (config.contains("params")) tipping::io::apply_params_json(probe, config["params"].dump());
  if (config.contains("preset")) preset = config["preset"].get<std::string>();
  if (config.contains("workers") && workers == 0) workers = config["workers"].get<unsigned>();
}

monsoon::MonsoonParams Context::params() const {
  monsoon::MonsoonParams p =
      preset == "table" ? monsoon::MonsoonParams{} : monsoon::MonsoonParams::reference();
  if (config.contains("params")) tipping::io::apply_params_json(p, config["params"].dump());
  p.validate();
  return p;
}

tipping::FpeGrid1D Context::fpe1d() const {
  tipping::FpeGrid1D g;
  take(config, "fpe1d", "x_bd", g.x_bd);
  take(config, "fpe1d", "nx", g.nx);
  take(config, "fpe1d", "nt", g.nt);
  take(config, "fpe1d", "T0", g.T0);
  take(config, "fpe1d", "x0", g.x0);
  take(config, "fpe1d", "var0", g.var0);
  return g;
}

tipping::Fpe2dGrid Context::fpe2d() const {
  tipping::Fpe2dGrid g;
  take(config, "fpe2d", "nQ", g.nQ);
  take(config, "fpe2d", "nT", g.nT);
  take(config, "fpe2d", "Q_lo", g.Q_lo);
  take(config, "fpe2d", "Q_hi", g.Q_hi);
  take(config, "fpe2d", "T_lo", g.T_lo);
  take(config, "fpe2d", "T_hi", g.T_hi);
  take(config, "fpe2d", "dt", g.dt);
  take(config, "fpe2d", "relax_time", g.relax_time);
  take(config, "fpe2d", "relax_tol", g.relax_tol);
  return g;
}

tipping::McOptions Context::mc() const {
  tipping::McOptions o;
  take(config, "mc", "n_paths", o.n_paths);
  take(config, "mc", "dt", o.dt);
  take(config, "mc", "seed", o.seed);
  take(config, "mc", "batch", o.batch);
  o.workers = workers;
  return o;
}

tipping::ClassifyOptions Context::classify() const {
  tipping::ClassifyOptions o;
  take(config, "classify", "tol", o.tol);
  take(config, "classify", "return_distance", o.return_distance);
  return o;
}

double Context::integration_tol() const { return classify().tol; }

tipping::RateModel Context::rate(const std::string& kind) const {
  std::string k = kind;
  if (k.empty()) k = config.value("rate", std::string("tabulated"));
  if (k == "quadratic") return tipping::RateModel::quadratic(tipping::quoted_mode_fit());
  return tipping::RateModel::tabulated();
}

fs::path Context::output_dir() const {
  return out_dir.empty() ? tipping::io::default_output_dir() : fs::path(out_dir);
}

fs::path Context::output(const std::string& explicit_path, const std::string& default_name) const {
  return explicit_path.empty() ? output_dir() / default_name : fs::path(explicit_path);
}

void Context::write(const fs::path& path, const std::string& content) const {
  tipping::io::write_atomic(path, content);
}

json Context::settings() const {
  tipping::FpeGrid1D f1 = fpe1d();
  tipping::Fpe2dGrid f2 = fpe2d();
  tipping::McOptions m = mc();
  tipping::ClassifyOptions c = classify();
  json j;
  j["preset"] = preset;
  j["params"] = json::object();
  for (const auto& [name, value] : monsoon::param_table(params())) j["params"][name] = value;
  j["fpe1d"] = {{"x_bd", f1.x_bd}, {"nx", f1.nx}, {"nt", f1.nt},
                {"T0", std::isnan(f1.T0) ? json(nullptr) : json(f1.T0)},
                {"x0", f1.x0}, {"var0", f1.var0}, {"scheme", "scharfetter-gummel tr-bdf2"}};
  j["fpe2d"] = {{"nQ", f2.nQ}, {"nT", f2.nT}, {"Q_lo", f2.Q_lo}, {"Q_hi", f2.Q_hi},
                {"T_lo", f2.T_lo}, {"T_hi", f2.T_hi}, {"dt", f2.dt},
                {"relax_time", f2.relax_time}, {"relax_tol", f2.relax_tol},
                {"scheme", "strang splitting, scharfetter-gummel tr-bdf2 sweeps"}};
  j["mc"] = {{"n_paths", m.n_paths}, {"dt", m.dt}, {"seed", m.seed}, {"batch", m.batch},
             {"scheme", "euler-maruyama"}};
  j["classify"] = {{"tol", c.tol}, {"return_distance", c.return_distance}};
  j["rate"] = config.value("rate", std::string("tabulated"));
  j["workers"] = workers == 0 ? tipping::default_workers() : workers;
  return j;
}

tipping::MonsoonProjection monsoon_projection(const monsoon::MonsoonParams& p, double D1,
                                              double D2) {
  tipping::Mat Delta = tipping::Mat::Zero(2, 2);
  Delta(0, 0) = D1;
  Delta(1, 1) = D2;
  return tipping::MonsoonProjection::from_fold(monsoon::fold(p), Delta);
}

std::string fmt(double v) { return tipping::io::format_number(v); }

}  // namespace kit
