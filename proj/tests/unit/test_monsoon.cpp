#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "tipping/error.hpp"
#include "tipping/monsoon.hpp"
#include "tipping/tipping_det.hpp"

using namespace tipping;
namespace m = tipping::monsoon;

namespace {

nlohmann::json golden() {
  std::ifstream in(std::string(TIPPING_TEST_DATA_DIR) + "/monsoon_rhs_golden.json");
  return nlohmann::json::parse(in);
}

void expect_terms(const m::Terms& t, const m::Tendency& d, const nlohmann::json& g) {
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); };
  EXPECT_LT(rel(t.E, g["E"]), 1e-12);
  EXPECT_LT(rel(t.P, g["P"]), 1e-12);
  EXPECT_LT(rel(t.A_v, g["A_v"]), 1e-12);
  EXPECT_LT(rel(t.F_up, g["F_up"]), 1e-12);
  EXPECT_LT(rel(t.Gamma, g["Gamma"]), 1e-12);
  EXPECT_LT(rel(t.theta_a, g["theta_a"]), 1e-12);
  EXPECT_LT(rel(t.A_T, g["A_T"]), 1e-11);
  EXPECT_LT(rel(d.dQ, g["dQ"]), 1e-10);
  EXPECT_LT(rel(d.dT, g["dT"]), 1e-10);
}

}  // namespace

TEST(MonsoonModel, TendencyMatchesGolden) {
  auto g = golden();
  m::MonsoonParams table;
  expect_terms(m::terms(0.02, 305.0, table), m::monsoon_rhs(0.02, 305.0, 0.50, table), g["table"]);
  expect_terms(m::terms(0.035, 298.0, table), m::monsoon_rhs(0.035, 298.0, 0.47, table), g["table2"]);
  m::MonsoonParams ref = m::MonsoonParams::reference();
  expect_terms(m::terms(0.02, 305.0, ref), m::monsoon_rhs(0.02, 305.0, 0.50, ref), g["reference"]);
}

TEST(MonsoonModel, ReferenceDiffersOnlyInHeatAdvection) {
  auto a = m::param_table(m::MonsoonParams{});
  auto b = m::param_table(m::MonsoonParams::reference());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first == "C_H")
      EXPECT_DOUBLE_EQ(b[i].second, 0.70);
    else
      EXPECT_DOUBLE_EQ(a[i].second, b[i].second) << a[i].first;
  }
}

TEST(MonsoonModel, SetParamByName) {
  m::MonsoonParams p;
  m::set_param(p, "Q_sat", 0.05);
  EXPECT_DOUBLE_EQ(p.Q_sat, 0.05);
  EXPECT_THROW(m::set_param(p, "nope", 1.0), TippingError);
}

TEST(MonsoonModel, ValidateReportsEveryViolation) {
  m::MonsoonParams p;
  p.beta = -1.0;
  p.I_q = 0.0;
  try {
    p.validate();
    FAIL();
  } catch (const TippingError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_GE(e.details().size(), 2u);
  }
}

TEST(MonsoonFold, ReferencePresetMatchesQuotedFold) {
  FoldPoint f = m::fold(m::MonsoonParams::reference());
  EXPECT_NEAR(f.q_b, 0.5287, 0.0005);
  EXPECT_NEAR(f.d_b, 318.36, 3.0);
  EXPECT_LE(std::abs(f.d_b - f.d_b_limit) / f.d_b, 1e-3);
  EXPECT_FALSE(f.flips.q_flipped);
  EXPECT_FALSE(f.flips.w_flipped);
  // Recomputed left nullvector agrees with the quoted weights within 2%.
  Vec w = m::default_output_weights();
  EXPECT_LT((f.w0 - w).norm() / w.norm(), 0.02);
}

TEST(MonsoonFold, TablePresetRegression) {
  FoldPoint f = m::fold(m::MonsoonParams{});
  EXPECT_NEAR(f.q_b, 0.52700, 5e-5);
  EXPECT_NEAR(f.d_b, 325.27, 0.05);
}

TEST(MonsoonFold, SquaredDecayRateScalesWithDistanceToFold) {
  m::MonsoonParams p = m::MonsoonParams::reference();
  FoldPoint f = m::fold(p);
  DynamicalSystem s = m::make_system(p);
  EXPECT_LT(leading_eigenvalue(s, find_equilibrium(s, 0.47, m::default_guess()), 0.47).value, -1.0);
  const double delta = 1e-5;
  // Continue along the stable branch; the Jacobian is singular at the fold itself.
  Vec y = m::default_guess();
  for (double q : {0.5, 0.52, f.q_b - 1e-3, f.q_b - 1e-4, f.q_b - delta})
    y = find_equilibrium(s, q, y);
  double lambda = leading_eigenvalue(s, y, f.q_b - delta).value;
  EXPECT_LT(lambda, 0.0);
  EXPECT_NEAR(lambda * lambda / delta, f.d_b, 0.01 * f.d_b);
}

TEST(MonsoonBranches, StableThenUnstable) {
  auto rows = m::equilibrium_branches(m::MonsoonParams::reference(), 0.45, 0.53, 40);
  ASSERT_GT(rows.size(), 10u);
  EXPECT_TRUE(rows.front().stable);
  EXPECT_FALSE(rows.back().stable);
  std::size_t flips = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) flips += rows[i].stable != rows[i - 1].stable;
  EXPECT_EQ(flips, 1u);
  // The stable (monsoon) branch is the wetter one.
  double Q_stable = rows.front().Q_a, Q_unstable = rows.back().Q_a;
  EXPECT_GT(Q_stable, Q_unstable);
}

TEST(MonsoonScenario, QuotedExceedanceTimes) {
  const double A_b = 0.5287;
  // Scenario list at S = 0.5 with times above the fold in years.
  const std::pair<double, double> cases[] = {{0.01, 8.0}, {0.02, 11.0}, {0.027, 12.7}, {0.03, 13.3}};
  for (auto [R, years] : cases) {
    m::AlbedoForcing f = m::scenario(R, 0.5, A_b);
    EXPECT_NEAR(10.0 * m::exceedance_time_exact(f), years, 0.1) << R;
  }
}

TEST(MonsoonScenario, ApproximateExceedanceForSmallPeaks) {
  m::AlbedoForcing f = m::scenario(1e-5, 0.5, 0.5287);
  double exact = m::exceedance_time_exact(f), approx = m::exceedance_time_approx(f);
  EXPECT_NEAR(exact / approx, 1.0, 1e-3);
  EXPECT_NEAR(f.profile().value(0.0) - 0.47, 1e-4 * (0.5287 - 0.47), 1e-12);
}
