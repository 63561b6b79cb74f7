#include <gtest/gtest.h>

#include "common.hpp"
#include "henon_dim/dimension_report.hpp"

using namespace henon;

namespace {

const DimensionReport& h1_report() {
  static const DimensionReport r = dimension_report(fixtures::h1());
  return r;
}

ReportConfig light() {
  ReportConfig c;
  c.box_dim = false;
  c.separated = false;
  return c;
}

}  // namespace

TEST(DimensionReport, CantorFlag) {
  EXPECT_TRUE(h1_report().cantor_flag);
  EXPECT_LE(0.3, std::pow(2.0, -0.5));
}

TEST(DimensionReport, StableRootBound) {
  const auto& r = h1_report();
  EXPECT_LT(r.t_s, r.t_u);
  EXPECT_LE(r.t_s, r.corneu_bound);
  const double ld = std::log(2.0);
  EXPECT_NEAR(r.corneu_bound, r.t_u * ld / (ld - r.t_u * std::log(0.3)), 1e-14);
  ASSERT_NE(r.check("corneu_strict"), nullptr);
  EXPECT_TRUE(r.check("corneu_strict")->pass);
}

TEST(DimensionReport, GrowthRateSandwich) {
  const auto& r = h1_report();
  const double ld = std::log(2.0), la = std::log(0.3);
  EXPECT_NEAR(r.promo_lower, (1.0 / r.growth.s_bar + 1.0 / (r.growth.s_bar - la)) * ld, 1e-14);
  EXPECT_NEAR(r.promo_upper, (1.0 / r.growth.s_under + 1.0 / (r.growth.s_under - la)) * ld, 1e-14);
  EXPECT_LE(r.promo_lower, r.dim_J);
  EXPECT_LE(r.dim_J, r.promo_upper);
}

TEST(DimensionReport, ConsistencyByConstruction) {
  const auto& r = h1_report();
  EXPECT_EQ(r.dim_J, r.t_u + r.t_s);
  // J+ is the union of stable manifolds, so its transversal dimension is t_u
  EXPECT_EQ(r.dim_Jplus - 2.0, r.t_u);
  EXPECT_EQ(r.dim_Jminus - 2.0, r.t_s);
  EXPECT_NEAR(r.box_bound, 4.0 - 2.0 * std::log(1.0 / 0.3) / r.norm.s_minus, 1e-14);
  EXPECT_EQ(r.annotations.size(), 4u);
}

TEST(DimensionReport, RootSandwichPerPeriod) {
  for (const auto& row : h1_report().roots) {
    EXPECT_GE(row.t_u, row.sandwich_u_lo);
    EXPECT_LE(row.t_u, row.sandwich_u_hi);
    EXPECT_GE(row.t_s, row.sandwich_s_lo);
    EXPECT_LE(row.t_s, row.sandwich_s_hi);
    EXPECT_LT(row.identity_error, 1e-10);
  }
}

TEST(DimensionReport, GreenCrossBounds) {
  const auto& r = h1_report();
  EXPECT_GE(r.t_u + 2.0, r.green_lower_minus - 0.05);
  EXPECT_GE(r.dim_Jplus, r.green_lower_plus - 0.05);
  EXPECT_GE(r.dim_Jminus, r.green_lower_minus - 0.05);
}

TEST(DimensionReport, BoxBoundHolds) {
  const auto& r = h1_report();
  ASSERT_TRUE(r.box.has_value());
  EXPECT_LE(r.box_dim_Kminus, r.box_bound);
}

TEST(DimensionReport, InvertsExpandingMaps) {
  // flip_inverse is an involution, so the report on it reruns H1 with labels swapped
  const auto r = dimension_report(flip_inverse(fixtures::h1()), light());
  const auto base = dimension_report(fixtures::h1(), light());
  EXPECT_TRUE(r.inverted);
  EXPECT_FALSE(base.inverted);
  EXPECT_EQ(r.t_u, base.t_s);
  EXPECT_EQ(r.t_s, base.t_u);
  EXPECT_EQ(r.dim_Jplus, base.dim_Jminus);
  EXPECT_EQ(r.norm.s_plus, base.norm.s_minus);
}

TEST(DimensionReport, StageLabelsOnFailure) {
  ReportConfig c = light();
  c.newton_tol = 1e-6;
  try {
    dimension_report(fixtures::h1(), c);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "periodic");
  }
}

TEST(Sweep, BoxBoundDecreasesWithModulus) {
  const auto out = sweep(fixtures::h1(), {0.3, 0.1, 0.03}, light());
  ASSERT_EQ(out.size(), 3u);
  for (const auto& e : out) {
    ASSERT_TRUE(e.report.has_value()) << e.error;
    EXPECT_GT(e.report->dim_Jminus, 2.0);
    EXPECT_LT(e.report->dim_Jminus, 4.0);
    EXPECT_GT(e.report->t_u + 2.0, 2.0);
    EXPECT_LT(e.report->t_u + 2.0, 4.0);
    EXPECT_TRUE(e.report->check("corneu")->pass);
  }
  EXPECT_GT(out[0].report->box_bound, out[1].report->box_bound);
  EXPECT_GT(out[1].report->box_bound, out[2].report->box_bound);
}

TEST(Sweep, ValidatesModuli) {
  EXPECT_THROW(sweep(fixtures::h1(), {0.1, 0.3}, light()), std::invalid_argument);
  EXPECT_THROW(sweep(fixtures::h1(), {1.5}, light()), std::invalid_argument);
  EXPECT_THROW(sweep(fixtures::h1(), {}, light()), std::invalid_argument);
}
