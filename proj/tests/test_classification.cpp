#include <gtest/gtest.h>

#include <random>

#include "common.hpp"
#include "henon_dim/classification.hpp"

using namespace henon;
using testing_support::quadratic_fixed;
using testing_support::random_point;

namespace {

// Plain escape loop with a caller-chosen sector radius.
bool escapes_with_radius(const HenonMap& g, PointC2 p, double radius, int n_max) {
  for (int n = 0; n <= n_max; ++n) {
    if (std::abs(p.w) > radius && std::abs(p.w) >= std::abs(p.z)) return true;
    if (!(max_modulus(p) < 1e100)) return true;
    p = eval(g, p, {1e300});
  }
  return false;
}

}  // namespace

TEST(Classify, FixedPointsStayBounded) {
  // the origin is fixed exactly in floating point for P(w) = w^2
  const PointC2 o{cplx{0.0}, cplx{0.0}};
  EXPECT_FALSE(classify_forward(fixtures::h3(), o, 200).escaped());
  EXPECT_FALSE(classify_backward(fixtures::h3(), o, 200).escaped());
  // saddles drift off by rounding after roughly 16 / log|lambda| steps, so a short horizon
  const auto g = fixtures::h1();
  const auto [wp, wm] = quadratic_fixed(-6.0, 0.3);
  for (double w : {wp, wm}) {
    const PointC2 p{cplx{w}, cplx{w}};
    EXPECT_FALSE(classify_forward(g, p, 12).escaped());
    EXPECT_FALSE(classify_backward(g, p, 12).escaped());
  }
}

TEST(Classify, LargeWEscapesFast) {
  const auto r = classify_forward(fixtures::h1(), {cplx{0.0}, cplx{10.0}}, 200);
  EXPECT_TRUE(r.escaped());
  EXPECT_LE(r.steps, 3);
}

TEST(Classify, BackwardOfConjugateInverseMatchesForward) {
  const auto g = fixtures::h1();
  const auto f = flip_inverse(g);  // f^{-1} = tau g tau
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_point(rng, g.escape_radius());
    EXPECT_EQ(classify_forward(g, p).escaped(), classify_backward(f, swap_coordinates(p)).escaped());
  }
}

TEST(Classify, DoubledRadiusSameVerdicts) {
  for (const auto& g : {fixtures::h1(), fixtures::h3()}) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 1000; ++i) {
      const auto p = random_point(rng, 1.2 * g.escape_radius());
      EXPECT_EQ(classify_forward(g, p).escaped(), escapes_with_radius(g, p, 2.0 * g.escape_radius(), 200));
    }
  }
}

TEST(Classify, MonotoneInHorizon) {
  const auto g = fixtures::h1();
  std::mt19937_64 rng(25);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_point(rng, g.escape_radius());
    const auto short_run = classify_forward(g, p, 5);
    const auto long_run = classify_forward(g, p, 200);
    if (short_run.escaped()) {
      EXPECT_TRUE(long_run.escaped());
      EXPECT_EQ(long_run.steps, short_run.steps);
    }
  }
}

TEST(Classify, RejectsBadInput) {
  EXPECT_THROW(classify_forward(fixtures::h1(), {cplx{0.0}, cplx{0.0}}, 0), std::invalid_argument);
  EXPECT_THROW(classify_forward(fixtures::h1(), {cplx{NAN}, cplx{0.0}}), std::invalid_argument);
}

TEST(Green, ZeroAtFixedPoint) {
  const PointC2 o{cplx{0.0}, cplx{0.0}};
  EXPECT_EQ(green(fixtures::h3(), o, Direction::Forward).value, 0.0);
  EXPECT_EQ(green(fixtures::h3(), o, Direction::Backward).value, 0.0);
  // rounded saddle: only the drift after the escape step is seen
  const auto [wp, wm] = quadratic_fixed(-6.0, 0.3);
  const PointC2 p{cplx{wp}, cplx{wp}};
  EXPECT_LT(green(fixtures::h1(), p, Direction::Forward).value, 1e-5);
  EXPECT_LT(green(fixtures::h1(), p, Direction::Backward).value, 1e-3);
}

TEST(Green, FunctionalEquation) {
  for (const auto& g : {fixtures::h1(), fixtures::h2(), fixtures::h3()}) {
    const double tol = kDefaultGreenTolerance;
    std::mt19937_64 rng(27);
    int probes = 0;
    while (probes < 100) {
      const auto p = random_point(rng, g.escape_radius());
      if (!classify_forward(g, p).escaped()) continue;
      ++probes;
      const auto a = green(g, p, Direction::Forward, tol);
      const auto b = green(g, eval(g, p), Direction::Forward, tol);
      ASSERT_TRUE(a.converged && b.converged);
      EXPECT_NEAR(b.value, 2.0 * a.value, 10.0 * tol);
      const auto am = green(g, p, Direction::Backward, tol);
      if (am.value > 0.0) {
        const auto bm = green(g, eval_inverse(g, p), Direction::Backward, tol);
        EXPECT_NEAR(bm.value, 2.0 * am.value, 10.0 * tol);
      }
    }
  }
}

TEST(Green, LeadingTermAsymptotics) {
  const double w = 1e10;
  const auto v = green(fixtures::h1(), {cplx{0.0}, cplx{w}}, Direction::Forward);
  EXPECT_NEAR(v.value / std::log(w), 1.0, 0.01);
}

TEST(Green, NonNegativeAndZeroOnBounded) {
  const auto g = fixtures::h3();
  std::mt19937_64 rng(29);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_point(rng, 1.5);
    const auto v = green(g, p, Direction::Forward);
    EXPECT_GE(v.value, 0.0);
    if (!classify_forward(g, p).escaped()) { EXPECT_EQ(v.value, 0.0); }
  }
}

TEST(BoxStatus, FarBoxEscapesBothWays) {
  const BoxR4 b{{40.0, 0.0, 40.0, 0.0}, 0.5};
  const auto s = box_status(fixtures::h1(), b);
  EXPECT_EQ(s.forward, ProbeVerdict::AllEscape);
  EXPECT_EQ(s.backward, ProbeVerdict::AllEscape);
}

TEST(BoxStatus, SaddleBoxIsMixed) {
  // K+ and K- have measure zero here, so the horizon must stay below the rounding drift
  const auto [wp, wm] = quadratic_fixed(-6.0, 0.3);
  for (double w : {wp, wm}) {
    const BoxR4 b{{w, 0.0, w, 0.0}, 0.02};
    const auto s = box_status(fixtures::h1(), b, 12, 256);
    EXPECT_EQ(s.forward, ProbeVerdict::Mixed);
    EXPECT_EQ(s.backward, ProbeVerdict::Mixed);
  }
}

TEST(BoxStatus, MoreProbesNeverUnmix) {
  const auto g = fixtures::h1();
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto c = random_point(rng, g.escape_radius());
    const BoxR4 b{to_real4(c), 0.25};
    const auto few = box_status(g, b, 200, 16);
    const auto many = box_status(g, b, 200, 256);
    if (few.forward == ProbeVerdict::Mixed) { EXPECT_EQ(many.forward, ProbeVerdict::Mixed); }
    if (few.backward == ProbeVerdict::Mixed) { EXPECT_EQ(many.backward, ProbeVerdict::Mixed); }
  }
  EXPECT_THROW(box_status(g, BoxR4{{0, 0, 0, 0}, 1.0}, 200, 8), std::invalid_argument);
}
