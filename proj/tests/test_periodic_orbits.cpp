#include <gtest/gtest.h>

#include "common.hpp"
#include "henon_dim/periodic_orbits.hpp"

using namespace henon;
using testing_support::h1_periodic;
using testing_support::quadratic_fixed;

TEST(FindPeriodic, TwoFixedPointsFromQuadraticFormula) {
  const auto& s = h1_periodic(1);
  ASSERT_EQ(s.fixed_point_count, 2);
  ASSERT_EQ(s.saddles.size(), 2u);
  EXPECT_TRUE(s.non_saddles.empty());
  const auto [wp, wm] = quadratic_fixed(-6.0, 0.3);
  // lex-min order: the negative root comes first
  const double expect[2] = {wm, wp};
  for (int i = 0; i < 2; ++i) {
    const auto& o = s.saddles[static_cast<std::size_t>(i)];
    EXPECT_NEAR(std::abs(o.point.z - cplx{expect[i]}), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(o.point.w - cplx{expect[i]}), 0.0, 1e-10);
    EXPECT_LT(distance(eval(fixtures::h1(), o.point), o.point), 1e-10);
    EXPECT_EQ(o.kind, OrbitKind::Saddle);
  }
}

TEST(FindPeriodic, FullShiftCounts) {
  for (int n = 1; n <= 8; ++n) {
    const auto& s = h1_periodic(n);
    EXPECT_EQ(s.fixed_point_count, 1L << n) << "n = " << n;
    EXPECT_EQ(s.saddle_point_count, 1L << n);
    EXPECT_EQ(s.paths_failed, 0);
    EXPECT_FALSE(s.hyperbolicity_doubtful);
  }
}

TEST(FindPeriodic, MultiplierInvariants) {
  const double log_a = std::log(0.3);
  for (int n : {1, 3, 6, 8}) {
    const auto& s = h1_periodic(n);
    long points = 0;
    for (const auto& o : s.saddles) {
      EXPECT_GT(std::abs(o.lambda_u), 1.0);
      EXPECT_LT(std::abs(o.lambda_s), 1.0);
      const double prod = std::abs(o.lambda_u * o.lambda_s);
      EXPECT_NEAR(prod / std::pow(0.3, n), 1.0, 1e-8);
      EXPECT_NEAR(o.log_abs_lambda_u + o.log_abs_lambda_s, n * log_a, 1e-9);
      EXPECT_LT(o.newton_residual, 1e-10);
      EXPECT_EQ(n % o.primitive_period, 0);
      points += o.primitive_period;
    }
    EXPECT_EQ(points, s.saddle_point_count);
  }
}

TEST(FindPeriodic, CyclesCloseUnderDirectIteration) {
  const auto g = fixtures::h1();
  for (int n : {2, 5, 8}) {
    for (const auto& o : h1_periodic(n).saddles) {
      // rounding in the start point is amplified by about |lambda_u|
      const double tol = 1e-13 * std::max(1.0, std::abs(o.lambda_u));
      EXPECT_LT(distance(iterate(g, o.point, n), o.point), tol);
      for (std::size_t j = 0; j + 1 < o.cycle.size(); ++j)
        EXPECT_LT(distance(eval(g, o.cycle[j]), o.cycle[j + 1]), 1e-10);
    }
  }
}

TEST(FindPeriodic, MultipliersMatchIteratedJacobian) {
  const auto g = fixtures::h1();
  for (const auto& o : h1_periodic(4).saddles) {
    const auto r = iterate_with_jacobian(g, o.point, o.period);
    const auto ev = eigenvalues(r.jacobian.trace(), r.jacobian.det());
    EXPECT_NEAR(std::abs(ev.large) / std::abs(o.lambda_u), 1.0, 1e-8);
  }
}

TEST(FindPeriodic, SinkIsSeparated) {
  const auto s = find_periodic(fixtures::h3(), 1, nullptr);
  EXPECT_EQ(s.fixed_point_count, 2);
  ASSERT_EQ(s.non_saddles.size(), 1u);
  EXPECT_EQ(s.non_saddles[0].kind, OrbitKind::Sink);
  EXPECT_LT(max_modulus(s.non_saddles[0].point), 1e-12);
  EXPECT_EQ(s.saddles.size(), 1u);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(FindPeriodic, PreconditionsChecked) {
  PeriodicOptions opt;
  opt.tol = 1e-6;
  EXPECT_THROW(find_periodic(fixtures::h1(), 1, nullptr, opt), std::invalid_argument);
  EXPECT_THROW(find_periodic(fixtures::h1(), 0, nullptr), std::invalid_argument);
}

TEST(UnstableDirection, ConvergesToEigenvector) {
  const auto g = fixtures::h1();
  for (const auto& o : h1_periodic(1).saddles) {
    const auto v = unstable_direction(g, o, 40);
    EXPECT_NEAR(norm(v), 1.0, 1e-14);
    const auto exact = eigenvector(jacobian(g, o.point), o.lambda_u);
    EXPECT_LT(line_angle(v, exact), 1e-6);
    const auto pushed = normalized(jacobian(g, o.point) * v);
    EXPECT_LT(line_angle(pushed, v), 1e-6);
  }
}

TEST(UnstableDirection, PointOverloadAgreesOnShortOrbits) {
  const auto g = fixtures::h1();
  const auto& o = h1_periodic(1).saddles[0];
  const auto a = unstable_direction(g, o.point, 8);
  const auto b = unstable_direction(g, o, 8);
  EXPECT_LT(line_angle(a, b), 1e-6);
  EXPECT_THROW(unstable_direction(g, PointC2{cplx{0.0}, cplx{0.0}}, 10), OrbitEscapeError);
}
