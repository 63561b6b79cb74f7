#include <gtest/gtest.h>

#include "common.hpp"
#include "henon_dim/cocycle_rates.hpp"
#include "henon_dim/pressure.hpp"

using namespace henon;
using testing_support::h1_periodic;

namespace {

std::vector<SaddleOrbit> h1_cycles() {
  std::vector<SaddleOrbit> out;
  for (int n = 1; n <= 8; ++n)
    for (const auto& o : h1_periodic(n).saddles)
      if (o.primitive_period == n) out.push_back(o);
  return out;
}

NormRates h1_rates(double radius_factor, int depth) {
  const auto g = fixtures::h1();
  SampleOptions so;
  so.radius = radius_factor * g.escape_radius();
  const auto plus = sample(g, Target::Jplus, depth, kDefaultHorizon, so);
  const auto minus = sample(g, Target::Jminus, depth, kDefaultHorizon, so);
  const auto cycles = h1_cycles();
  return norm_rates(g, plus, minus, {4, 8, 12, 16}, {}, cycles);
}

const NormRates& h1_rates_r() {
  static const NormRates r = h1_rates(1.0, 5);
  return r;
}

}  // namespace

TEST(GrowthRates, SingleOrbit) {
  PeriodicSearch s;
  s.n = 1;
  SaddleOrbit o;
  o.log_abs_lambda_u = 3.0;
  s.saddles.push_back(o);
  const std::vector<PeriodicSearch> v{s};
  const auto r = growth_rates_periodic(v);
  EXPECT_DOUBLE_EQ(r.s_bar, 3.0);
  EXPECT_DOUBLE_EQ(r.s_under, 3.0);
}

TEST(GrowthRates, HorseshoeOrdering) {
  std::vector<PeriodicSearch> v;
  for (int n = 1; n <= 8; ++n) v.push_back(h1_periodic(n));
  const auto r = growth_rates_periodic(v);
  EXPECT_GT(r.s_under, 0.0);
  for (const auto& row : r.per_n) EXPECT_GE(row.max_value, row.min_value);
  EXPECT_EQ(r.per_n.back().n, 8);
}

TEST(GrowthRates, RejectsEmpty) {
  EXPECT_THROW(growth_rates_periodic(std::vector<PeriodicSearch>{}), std::invalid_argument);
  PeriodicSearch s;
  EXPECT_THROW(growth_rates_periodic(std::vector<PeriodicSearch>{s}), std::invalid_argument);
}

TEST(NormRates, SaddleFixedPointTendsToMultiplier) {
  const auto g = fixtures::h1();
  const auto& o = h1_periodic(1).saddles[0];
  const std::vector<SaddleOrbit> one{o};
  const auto r = norm_rate_periodic(g, one, {1, 4, 16, 64}, Direction::Forward);
  double prev_gap = 1e300;
  for (const auto& [n, v] : r.per_n) {
    const double gap = std::abs(v - o.log_abs_lambda_u);
    EXPECT_LE(gap, prev_gap + 1e-12);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 0.02);
}

TEST(NormRates, FeketeDoubling) {
  const auto& r = h1_rates_r();
  auto at = [](const std::vector<std::pair<int, double>>& v, int n) {
    for (const auto& [k, x] : v)
      if (k == n) return x;
    return std::nan("");
  };
  for (const auto* v : {&r.per_n_plus, &r.per_n_minus}) {
    EXPECT_LE(at(*v, 8), at(*v, 4) + 0.05);
    EXPECT_LE(at(*v, 16), at(*v, 8) + 0.05);
  }
  EXPECT_GT(r.probes_plus, 0);
  EXPECT_GT(r.probes_minus, 0);
}

TEST(NormRates, IndependentOfFiltrationRadius) {
  const auto& a = h1_rates_r();
  const auto b = h1_rates(2.0, 6);
  EXPECT_LT(std::abs(a.s_plus - b.s_plus), 0.05);
  EXPECT_LT(std::abs(a.s_minus - b.s_minus), 0.05);
}

TEST(NormRates, WrongTargetRejected) {
  const auto g = fixtures::h1();
  const auto minus = sample(g, Target::Jminus, 3);
  EXPECT_THROW(norm_rate(g, minus, {4}, Direction::Forward), std::invalid_argument);
  EXPECT_THROW(norm_rate(g, minus, {}, Direction::Backward), std::invalid_argument);
}

TEST(HolderBound, Arithmetic) {
  const auto g = fixtures::h1();
  const auto a = holder_bound(g, std::log(4.0));
  EXPECT_NEAR(a.exponent, 0.5, 1e-15);
  EXPECT_NEAR(a.dim_lower, 2.5, 1e-15);
  const auto b = holder_bound(g, std::log(2.0));
  EXPECT_NEAR(b.exponent, 1.0, 1e-15);
  EXPECT_NEAR(b.dim_lower, 3.0, 1e-15);
  EXPECT_THROW(holder_bound(g, 0.0), std::invalid_argument);
}

TEST(HolderBound, ConsistentWithBowenRuelle) {
  const auto& s = h1_periodic(8);
  const auto root = bowen_ruelle_root([&](double t) { return pressure_periodic(s, t, Side::Unstable); });
  const auto hb = holder_bound(fixtures::h1(), h1_rates_r());
  EXPECT_LE(hb.minus.dim_lower, root.root + 2.0 + 0.05);
}
