#include <gtest/gtest.h>

#include <set>

#include "coarselab/experiment.hpp"
#include "coarselab/morse.hpp"
#include "coarselab/spaces.hpp"
#include "oracles.hpp"

using namespace coarselab;

namespace {

bool brute_qg(const GraphSpace& sp, const PathSeg& p, double q, double Q) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      double d = static_cast<double>(sp.distance(p.vertex(i), p.vertex(j))), t = static_cast<double>(j - i);
      if (d < t / q - Q - 1e-9 || d > q * t + Q + 1e-9) return false;
    }
  return true;
}

}  // namespace

TEST(Morse, NearestProjectionMatchesBruteForce) {
  for (auto spec : {"free_group(2)", "loopy_ray(8)", "grid(2)"}) {
    auto sp = build_space(spec);
    PathSeg Z = build_ray(*sp, "", 30);
    auto pi = nearest_projection(Z);
    Rng rng(2);
    for (int i = 0; i < 40; ++i) {
      // the base point is within 8 of x, so every nearest point lies in the ball
      Vertex x = sp->sample(rng, 8);
      auto ball = oracle::bfs(*sp, x, 8);
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      std::set<std::size_t> want;
      for (std::size_t k = 0; k < Z.size(); ++k) {
        auto it = ball.find(Z.vertex(k));
        if (it == ball.end()) continue;
        if (it->second < best) { best = it->second; want.clear(); }
        if (it->second == best) want.insert(k);
      }
      auto got = pi(x);
      EXPECT_EQ(std::set<std::size_t>(got.begin(), got.end()), want) << spec << " " << sp->format(x);
    }
  }
}

TEST(Morse, ProjectionNormAtMostTwiceNorm) {
  // d(x, p) <= d(x, o) and |p| <= |x| + d(x, p)
  for (auto spec : {"free_group(2)", "grid(2)", "free_product(grid(2), free_group(1))", "loopy_ray(20)"}) {
    auto sp = build_space(spec);
    PathSeg Z = build_ray(*sp, "", 400);
    auto pi = nearest_projection(Z);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      Vertex x = sp->sample(rng, 150);
      for (auto k : pi(x)) EXPECT_LE(Z.norm(k), 2 * sp->norm(x));
    }
  }
}

TEST(Morse, QuasiGeodesicCheckMatchesBruteForce) {
  auto sp = build_space("free_product(grid(2), free_group(1))");
  Rng rng(8);
  for (int i = 0; i < 60; ++i) {
    std::vector<Vertex> trail{sp->base()};
    wander(*sp, sp->base(), 25, rng, &trail);
    PathSeg p = sp->make_path(trail);
    for (auto [q, Q] : {std::pair{1.0, 0.0}, {1.5, 1.0}, {2.0, 3.0}, {3.0, 0.0}})
      EXPECT_EQ(is_quasi_geodesic(p, q, Q).ok, brute_qg(*sp, p, q, Q)) << q << "," << Q;
  }
}

TEST(Morse, SurgeryPostconditions) {
  auto sp = std::dynamic_pointer_cast<const CayleySpace>(build_space("free_group(2)"));
  const auto& g = sp->group();
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    std::int64_t r = rng.range(8, 20), R = rng.range(r, 3 * r);
    PathSeg gamma = build_ray(*sp, "a", 2 * R + 8);
    Element end = g.parse_word("a^" + std::to_string(r + rng.range(0, 5)));
    for (int j = 0, len = static_cast<int>(rng.range(5, 40)); j < len; ++j) {
      int gen = static_cast<int>(rng.below(g.num_generators()));
      if (j == 0 && gen == FreeProductGroup::inverse_gen(0)) gen = 2;
      g.right_mul_gen(end, gen);
    }
    PathSeg alpha = sp->geodesic(Element{}, end);
    PathSeg out = surgery(*sp, gamma, alpha, 1, 0, r, R);
    std::size_t cut = first_time_at_norm(alpha, r / 2);
    for (std::size_t i = 0; i <= cut; ++i) ASSERT_EQ(out.vertex(i), alpha.vertex(i));
    std::size_t gR = first_time_at_norm(gamma, R);
    std::size_t tail = gamma.size() - gR;
    for (std::size_t i = 0; i < tail; ++i) ASSERT_EQ(out.vertex(out.size() - tail + i), gamma.vertex(gR + i));
    EXPECT_TRUE(brute_qg(*sp, out, 9, 0));
  }
}

TEST(Morse, FreeGroupAxisIsMorseAndPlaneDiagonalIsNot) {
  MorseTestParams p{8, 64, 2, 4, 60, 5};
  auto f2 = build_space("free_group(2)");
  auto v = test_kappa_morse(*f2, build_ray(*f2, "a", 140), kappa_from_tag("1"), kappa_from_tag("1"), MorseGauge(4), p);
  EXPECT_TRUE(v.pass) << v.note;
  EXPECT_GT(v.checked, 0u);
  auto z2 = build_space("grid(2)");
  p.Q = 0;
  auto w = test_kappa_morse(*z2, build_ray(*z2, "ab", 140), kappa_from_tag("1"), kappa_from_tag("1"), MorseGauge(4), p);
  EXPECT_FALSE(w.pass);
  ASSERT_FALSE(w.witness_path.empty());
  EXPECT_GT(static_cast<double>(build_ray(*z2, "ab", 140).distance_to(w.witness_path[w.witness_index])), 4.0);
}

TEST(Morse, BandsStable) {
  std::vector<BandStat> flat{{8, 1, 5}, {16, 1, 5}, {32, 1.1, 5}, {64, 1.2, 5}};
  std::vector<BandStat> growing{{8, 1, 5}, {16, 2, 5}, {32, 4, 5}, {64, 8, 5}};
  EXPECT_TRUE(bands_stable(flat));
  EXPECT_FALSE(bands_stable(growing));
  EXPECT_FALSE(bands_stable({{8, 1, 5}, {16, 1, 5}}));
}
