#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tipping/dynsys.hpp"
#include "tipping/escape_grid.hpp"
#include "tipping/mode.hpp"
#include "tipping/monsoon.hpp"
#include "tipping/tipping_det.hpp"

namespace tipping::io {

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "TIPPING_KIT_OUTPUT_DIR";
std::filesystem::path default_output_dir();

// Writes to a sibling temp file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_number(double v);  // %.12g, "nan"/"inf" spelled out

std::string trajectory_csv(const Trajectory& traj);  // t,q,y1,...,yn
std::string branches_csv(const std::vector<monsoon::BranchRow>& rows);
std::string critical_curve_csv(const std::vector<CriticalPoint>& points);
std::string escape_grid_csv(const EscapeGrid& grid);
std::string boundaries_csv(const std::vector<BoundaryRow>& rows);

// JSON documents, serialized with two-space indentation.
std::string fold_json(const FoldPoint& fold);
std::string verdict_json(const TippingVerdict& v);
std::string mode_fit_json(const ModeFit& fit);

// Overrides parameters from a JSON object keyed by table symbols. Unknown keys
// and non-numeric values are all reported in one validation error.
void apply_params_json(monsoon::MonsoonParams& p, const std::string& json_text);

}  // namespace tipping::io
