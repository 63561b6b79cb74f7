#include <gtest/gtest.h>

#include <set>

#include "common.hpp"
#include "henon_dim/julia_sampler.hpp"

using namespace henon;
using testing_support::quadratic_fixed;

TEST(Sample, BoxesMeetTheBidisk) {
  for (auto t : {Target::J, Target::Jplus, Target::Jminus, Target::Kminus}) {
    const auto s = sample(fixtures::h1(), t, 4);
    ASSERT_GT(s.size(), 0u);
    EXPECT_TRUE(std::is_sorted(s.cells.begin(), s.cells.end()));
    for (const auto& b : s.boxes) {
      EXPECT_TRUE(meets_bidisk(b, s.radius));
      EXPECT_DOUBLE_EQ(b.half_width, s.resolution);
    }
  }
}

TEST(Sample, JBoxesAvoidEscapeSectors) {
  const auto& s = testing_support::h1_j_sample();
  const double r = fixtures::h1().escape_radius();
  for (const auto& b : s.boxes) {
    const auto c = b.center_point();
    EXPECT_FALSE(in_forward_sector(c, r));
    EXPECT_FALSE(in_backward_sector(c, r));
  }
}

TEST(Sample, SaddleFixedPointsCoveredAtEveryDepth) {
  const auto [wp, wm] = quadratic_fixed(-6.0, 0.3);
  for (int depth = 1; depth <= 6; ++depth) {
    const auto s = sample(fixtures::h1(), Target::J, depth);
    for (double w : {wp, wm}) EXPECT_GE(s.find({cplx{w}, cplx{w}}), 0) << "depth " << depth;
  }
}

TEST(Sample, RefinementKeepsAncestors) {
  const auto coarse = sample(fixtures::h1(), Target::Jminus, 4);
  const auto fine = sample(fixtures::h1(), Target::Jminus, 5);
  const std::set<CellKey> parents(coarse.cells.begin(), coarse.cells.end());
  for (CellKey k : fine.cells) EXPECT_TRUE(parents.count(ancestor_cell(k, 1)));
  EXPECT_EQ(fine.count_per_depth[4], coarse.size());
}

TEST(Sample, GraphRetention) {
  const auto g = fixtures::h1();
  for (auto t : {Target::J, Target::Jplus, Target::Jminus}) {
    const auto s = sample(g, t, 4);
    const auto tg = transition_graph(g, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (t == Target::J || t == Target::Jplus) { EXPECT_FALSE(tg.succ[i].empty()); }
      if (t == Target::J || t == Target::Jminus) { EXPECT_FALSE(tg.pred[i].empty()); }
    }
  }
}

TEST(Sample, ImagesOfCentersLandNearSuccessors) {
  const auto g = fixtures::h1();
  const auto s = sample(g, Target::J, 5);
  const auto tg = transition_graph(g, s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto img = eval(g, s.boxes[i].center_point());
    double best = 1e300;
    for (auto j : tg.succ[i]) best = std::min(best, distance(img, s.boxes[j].center_point()));
    // the image of a box of half width h has diameter about |Dg| h
    EXPECT_LT(best, 20.0 * s.resolution);
  }
}

TEST(Sample, DepthLimits) {
  EXPECT_THROW(sample(fixtures::h1(), Target::J, 0), std::invalid_argument);
  EXPECT_THROW(sample(fixtures::h1(), Target::J, kMaxDepth + 1), std::invalid_argument);
  EXPECT_THROW(sample(fixtures::h1(), Target::J, 3, 0), std::invalid_argument);
}

TEST(CellKeys, PackRoundTrip) {
  const std::array<std::uint32_t, 4> k{1, 2, 300, 65535};
  EXPECT_EQ(unpack_cell(pack_cell(k)), k);
  const std::array<std::uint32_t, 4> parent{0, 1, 150, 32767};
  EXPECT_EQ(unpack_cell(ancestor_cell(pack_cell(k), 1)), parent);
}

TEST(BoxGrid, CellOfCenterIsItself) {
  const BoxGrid grid{3.0, 5};
  for (CellKey key : {pack_cell({0, 0, 0, 0}), pack_cell({3, 17, 31, 8})}) {
    EXPECT_EQ(grid.cell_of(grid.box(key).center_point()), key);
  }
}

TEST(TargetNames, RoundTrip) {
  for (auto t : {Target::J, Target::Jplus, Target::Jminus, Target::Kminus})
    EXPECT_EQ(target_from_string(to_string(t)), t);
  EXPECT_THROW(target_from_string("K"), std::invalid_argument);
}
