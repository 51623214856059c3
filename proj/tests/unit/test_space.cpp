#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "coarselab/spaces.hpp"
#include "oracles.hpp"

using namespace coarselab;

namespace {

const char* kSpaces[] = {"free_group(2)", "grid(2)", "free_product(grid(2), free_group(1))", "loopy_ray(12)"};

}  // namespace

TEST(Space, NormAndDistanceMatchBfs) {
  for (auto spec : kSpaces) {
    auto sp = build_space(spec);
    Rng rng(3);
    std::vector<Vertex> centers{sp->base()};
    for (int i = 0; i < 4; ++i) centers.push_back(sp->sample(rng, 6));
    for (auto& c : centers) {
      auto d = oracle::bfs(*sp, c, 6);
      std::size_t bad = 0;
      for (auto& [v, dv] : d) bad += sp->distance(c, v) != dv;
      EXPECT_EQ(bad, 0u) << spec << " center " << sp->format(c);
    }
    for (auto& [v, dv] : oracle::bfs(*sp, sp->base(), 6)) ASSERT_EQ(sp->norm(v), dv) << spec;
  }
}

TEST(Space, GeodesicsHaveLengthEqualToDistance) {
  for (auto spec : kSpaces) {
    auto sp = build_space(spec);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      Vertex x = sp->sample(rng, 20), y = sp->sample(rng, 20);
      auto g = sp->geodesic(x, y);
      EXPECT_EQ(static_cast<std::int64_t>(g.length()), sp->distance(x, y)) << spec;
      EXPECT_EQ(g.front(), x);
      EXPECT_EQ(g.back(), y);
      for (std::size_t k = 1; k < g.size(); ++k) ASSERT_TRUE(sp->adjacent(g.vertex(k - 1), g.vertex(k)));
    }
  }
}

TEST(Space, SphereCountsMatchBfs) {
  for (auto spec : {"free_group(2)", "grid(2)", "grid(3)", "free_product(grid(2), free_group(1))", "free_group(3)"}) {
    auto g = FreeProductGroup::parse(spec);
    CayleySpace sp(g);
    SphereSampler s(g);
    std::map<std::int64_t, double> count;
    for (auto& [v, d] : oracle::bfs(sp, sp.base(), 6)) count[d] += 1;
    for (auto& [n, c] : count) EXPECT_NEAR(std::exp(s.log_sphere_size(n)), c, 1e-6 * c) << spec << " n=" << n;
  }
}

TEST(Space, SphereSamplerIsUniform) {
  auto g = FreeProductGroup::parse("free_product(grid(2), free_group(1))");
  SphereSampler s(g);
  Rng rng(11);
  std::map<std::string, int> hits;
  const int N = 110 * 400;
  for (int i = 0; i < N; ++i) {
    auto x = s.sample(3, rng);
    ASSERT_EQ(g.norm(x), 3);
    hits[g.format(x)]++;
  }
  ASSERT_EQ(hits.size(), 110u);
  // chi-square with 109 degrees of freedom; 99.9% quantile is about 160
  double chi = 0;
  for (auto& [k, v] : hits) chi += (v - 400.0) * (v - 400.0) / 400.0;
  EXPECT_LT(chi, 160);
}

TEST(Space, LoopyRayLoopGeometry) {
  LoopyRaySpace sp(10);
  // loop n joins ray points a_n and a_n + n through 2n^2 edges
  EXPECT_EQ(sp.attach(2), 4);
  EXPECT_EQ(sp.attach(3), 8);
  for (int n = 2; n <= 10; ++n) {
    auto apex = sp.apex(n);
    EXPECT_EQ(sp.norm(apex), sp.attach(n) + n * n);
    EXPECT_EQ(sp.distance(sp.ray(sp.attach(n)), sp.ray(sp.attach(n) + n)), n);
  }
}

TEST(Space, ParseFormatRoundTrip) {
  for (auto spec : kSpaces) {
    auto sp = build_space(spec);
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
      Vertex v = sp->sample(rng, 15);
      EXPECT_EQ(sp->parse(sp->format(v)), v) << spec;
    }
  }
}

TEST(Space, SpecErrors) {
  EXPECT_THROW(build_space("hyperbolic_plane"), std::invalid_argument);
  EXPECT_THROW(build_space("loopy_ray(x)"), std::invalid_argument);
}
