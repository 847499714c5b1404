#include "tipping/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include "json.hpp"
#include <random>
#include <sstream>

#include "tipping/error.hpp"

namespace tipping::io {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env && *env ? fs::path(env) : fs::current_path();
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path dir = path.parent_path();
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail_validation("unwritable-output", "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail_validation("unwritable-output", "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    fail_validation("unwritable-output", "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,q";
  for (Eigen::Index k = 0; k < traj.states.cols(); ++k) os << ",y" << k + 1;
  os << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << format_number(traj.times[i]) << ','
       << format_number(i < traj.forcing_values.size() ? traj.forcing_values[i] : kNaN);
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k)
      os << ',' << format_number(traj.states(static_cast<Eigen::Index>(i), k));
    os << '\n';
  }
  return os.str();
}

std::string branches_csv(const std::vector<monsoon::BranchRow>& rows) {
  std::ostringstream os;
  os << "A_sys,Q_a,T_a,stable\n";
  for (const auto& r : rows)
    os << format_number(r.A_sys) << ',' << format_number(r.Q_a) << ',' << format_number(r.T_a)
       << ',' << (r.stable ? 1 : 0) << '\n';
  return os.str();
}

std::string critical_curve_csv(const std::vector<CriticalPoint>& points) {
  std::ostringstream os;
  os << "t_e,R_crit,R_asymptotic\n";
  for (const auto& p : points)
    os << format_number(p.t_e) << ',' << format_number(p.ok ? p.R_crit : kNaN) << ','
       << format_number(p.R_asymptotic) << '\n';
  return os.str();
}

std::string escape_grid_csv(const EscapeGrid& grid) {
  std::ostringstream os;
  os << "axis1,axis2,p0,p2,prob,method,valid\n";
  std::string method = to_string(grid.method);
  for (const auto& n : grid.nodes)
    os << format_number(n.axis1) << ',' << format_number(n.axis2) << ',' << format_number(n.p0)
       << ',' << format_number(n.p2) << ',' << format_number(n.valid ? n.prob : kNaN) << ','
       << method << ',' << (n.valid ? 1 : 0) << '\n';
  return os.str();
}

std::string boundaries_csv(const std::vector<BoundaryRow>& rows) {
  std::ostringstream os;
  os << "R,te_deterministic,te_mode_valid\n";
  for (const auto& r : rows)
    os << format_number(r.R) << ',' << format_number(r.te_deterministic) << ','
       << format_number(r.te_mode_valid) << '\n';
  return os.str();
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

}  // namespace

std::string fold_json(const FoldPoint& f) {
  json j;
  j["y_b"] = vec(f.y_b);
  j["q_b"] = num(f.q_b);
  j["v0"] = vec(f.v0);
  j["w0"] = vec(f.w0);
  j["w"] = vec(f.w);
  j["a0"] = num(f.a0);
  j["kappa"] = num(f.kappa);
  j["d_b"] = num(f.d_b);
  j["d_b_limit"] = num(f.d_b_limit);
  j["lambda_at_fold"] = num(f.lambda_at_fold);
  j["sign_flips"] = {{"q_flipped", f.flips.q_flipped}, {"w_flipped", f.flips.w_flipped}};
  j["has_coefficients"] = f.has_coefficients;
  return j.dump(2) + "\n";
}

std::string verdict_json(const TippingVerdict& v) {
  json j;
  j["tipped"] = v.tipped;
  j["margin"] = num(v.margin);
  j["method"] = to_string(v.method);
  if (v.integration_failed) j["integration_failed"] = true;
  return j.dump(2) + "\n";
}

std::string mode_fit_json(const ModeFit& fit) {
  json j;
  j["c0"] = num(fit.c0);
  j["c2"] = num(fit.c2);
  j["sample_xbars"] = nums(fit.sample_xbars);
  j["sample_log_rates"] = nums(fit.sample_log_rates);
  j["residuals"] = nums(fit.residuals);
  j["max_residual"] = num(fit.max_residual);
  return j.dump(2) + "\n";
}

void apply_params_json(monsoon::MonsoonParams& p, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail_validation("invalid-config", e.what());
  }
  if (!j.is_object()) fail_validation("invalid-config", "parameter overrides must be a JSON object");
  Violations v;
  auto names = monsoon::param_table(p);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& n : names) known = known || n.first == key;
    if (!known) {
      v.check(false, "unknown parameter '" + key + "'");
      continue;
    }
    if (!value.is_number()) {
      v.check(false, "parameter '" + key + "' must be a number");
      continue;
    }
    monsoon::set_param(p, key, value.get<double>());
  }
  v.throw_if_any("invalid-config");
}

}  // namespace tipping::io
