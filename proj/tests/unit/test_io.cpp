#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tipping/error.hpp"
#include "tipping/io.hpp"

using namespace tipping;
namespace fs = std::filesystem;

TEST(Io, AtomicWriteReplacesFile) {
  fs::path dir = fs::temp_directory_path() / "tipping_io_test";
  fs::create_directories(dir);
  fs::path f = dir / "out.txt";
  io::write_atomic(f, "first");
  io::write_atomic(f, "second");
  std::ifstream in(f);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "second");
  std::size_t files = 0;
  for (auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
  fs::remove_all(dir);
}

TEST(Io, UnwritableOutput) {
  try {
    io::write_atomic("/proc/definitely/not/here.csv", "x");
    FAIL();
  } catch (const TippingError& e) {
    EXPECT_EQ(e.code(), "unwritable-output");
  }
}

TEST(Io, NumberFormatting) {
  EXPECT_EQ(io::format_number(0.5), "0.5");
  EXPECT_EQ(io::format_number(std::nan("")), "nan");
  EXPECT_EQ(io::format_number(INFINITY), "inf");
}

TEST(Io, CsvHeaders) {
  Trajectory t;
  t.times = {0.0, 1.0};
  t.states = Mat::Zero(2, 2);
  t.forcing_values = {0.1, 0.2};
  std::string csv = io::trajectory_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,q,y1,y2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);

  EscapeGrid g;
  g.axis1 = {0.1};
  g.axis2 = {1.0};
  g.nodes.resize(1);
  std::string grid = io::escape_grid_csv(g);
  EXPECT_NE(grid.find("nan"), std::string::npos);
}

TEST(Io, VerdictJson) {
  TippingVerdict v;
  v.tipped = true;
  v.margin = -2.0;
  auto j = nlohmann::json::parse(io::verdict_json(v));
  EXPECT_TRUE(j["tipped"].get<bool>());
  EXPECT_DOUBLE_EQ(j["margin"].get<double>(), -2.0);
}

TEST(Io, ParamsJsonReportsAllProblems) {
  monsoon::MonsoonParams p;
  io::apply_params_json(p, R"({"C_H": 0.7})");
  EXPECT_DOUBLE_EQ(p.C_H, 0.7);
  try {
    io::apply_params_json(p, R"({"nope": 1, "C_H": "x"})");
    FAIL();
  } catch (const TippingError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_EQ(e.details().size(), 2u);
  }
  EXPECT_THROW(io::apply_params_json(p, "{"), TippingError);
}
