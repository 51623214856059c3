#include <gtest/gtest.h>

#include "coarselab/randwalk.hpp"

using namespace coarselab;

namespace {

std::shared_ptr<const CayleySpace> cayley(const std::string& spec) {
  return std::make_shared<CayleySpace>(FreeProductGroup::parse(spec));
}

}  // namespace

TEST(RandWalk, MeasureParsing) {
  auto g = FreeProductGroup::parse("free_group(2)");
  auto mu = StepMeasure::parse(g, "uniform");
  ASSERT_EQ(mu.support.size(), 4u);
  for (double p : mu.prob) EXPECT_DOUBLE_EQ(p, 0.25);
  EXPECT_TRUE(mu.reaches_ball(g));
  auto half = StepMeasure::parse(g, "uniform:aA");
  EXPECT_FALSE(half.reaches_ball(g));
  EXPECT_THROW(StepMeasure::parse(g, "a:0.5,b:0.4"), std::invalid_argument);
  EXPECT_THROW(StepMeasure::parse(g, "uniform:z"), std::invalid_argument);
}

TEST(RandWalk, DyadicTimes) {
  EXPECT_EQ(dyadic_times(16), (std::vector<std::int64_t>{1, 2, 4, 8, 16}));
  EXPECT_EQ(dyadic_times(20), (std::vector<std::int64_t>{1, 2, 4, 8, 16, 20}));
}

TEST(RandWalk, PositionsFollowTheSteps) {
  auto sp = cayley("free_product(grid(2), free_group(1))");
  auto mu = StepMeasure::parse(sp->group(), "uniform");
  auto paths = sample_paths(*sp, mu, 64, 5, 9);
  for (auto& p : paths) {
    Element w;
    std::vector<Element> want;
    for (std::size_t k = 0; k < p.steps.size(); ++k) {
      sp->group().right_mul(w, mu.support[p.steps[k]]);
      if (k + 1 == 8 || k + 1 == 64) want.push_back(w);
    }
    EXPECT_EQ(positions(sp->group(), mu, p, {8, 64}), want);
  }
}

TEST(RandWalk, FreeGroupDriftIsOneHalf) {
  // birth-death chain on |w|: up with probability 3/4, down 1/4
  auto sp = cayley("free_group(2)");
  auto mu = StepMeasure::parse(sp->group(), "uniform");
  auto d = drift(walk_table(*sp, mu, sample_paths(*sp, mu, 1024, 2000, 4)));
  EXPECT_NEAR(d.ell.estimate, 0.5, 0.01);
  EXPECT_TRUE(d.subadditive);
}

TEST(RandWalk, ProgressTailSeparatesTreeFromPlane) {
  for (auto [spec, expect] : {std::pair{"free_group(2)", true}, {"grid(2)", false}}) {
    auto sp = cayley(spec);
    auto mu = StepMeasure::parse(sp->group(), "uniform");
    auto t = walk_table(*sp, mu, sample_paths(*sp, mu, 2048, 600, 6));
    auto d = drift(t);
    EXPECT_EQ(progress_tail(t, d.ell.estimate, 0.8).verdict.pass, expect) << spec;
  }
}

TEST(RandWalk, HittingMeasureIsSymmetricOnTheTree) {
  auto sp = cayley("free_group(2)");
  auto mu = StepMeasure::parse(sp->group(), "uniform");
  auto paths = sample_paths(*sp, mu, 256, 2000, 8);
  auto h = hitting_histogram(sp->group(), mu, paths, 256);
  EXPECT_TRUE(h.symmetry.pass) << h.symmetry.note;
  EXPECT_EQ(h.counts.size(), 4u);
}

TEST(RandWalk, DeterministicGivenSeed) {
  auto sp = cayley("free_group(2)");
  auto mu = StepMeasure::parse(sp->group(), "uniform");
  auto a = sample_paths(*sp, mu, 100, 10, 77), b = sample_paths(*sp, mu, 100, 10, 77);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].steps, b[i].steps);
}
