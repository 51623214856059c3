#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "coarselab/relhyp.hpp"
#include "oracles.hpp"

using namespace coarselab;

namespace {

std::shared_ptr<const CayleySpace> z2z() {
  return std::make_shared<CayleySpace>(FreeProductGroup::parse("free_product(grid(2), free_group(1))"));
}

Element flat(const FreeProductGroup& g, std::int64_t i, std::int64_t j) {
  return g.parse_word("a^" + std::to_string(i) + " b^" + std::to_string(j));
}

}  // namespace

TEST(RelHyp, ProjectionExampleFromTheSpecOfTheFlat) {
  auto sp = z2z();
  RelHypGroup G(sp);
  const auto& g = G.group();
  Element x = g.parse_word("a^3 b^4 t a^5");
  Coset P = G.coset(0, Element{});
  EXPECT_EQ(G.coset_projection(x, P), g.parse_word("a^3 b^4"));
  EXPECT_EQ(G.d_P(Element{}, x, P), 7);
}

TEST(RelHyp, CosetProjectionMatchesExhaustiveSearch) {
  auto sp = z2z();
  RelHypGroup G(sp);
  const auto& g = G.group();
  Rng rng(21);
  for (int k = 0; k < 60; ++k) {
    Element x = sp->element(sp->sample(rng, 10));
    Element rep = sp->element(sp->sample(rng, 4));
    Coset P = G.coset(0, rep);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<Element> argmin;
    for (std::int64_t i = -20; i <= 20; ++i)
      for (std::int64_t j = -20 + std::abs(i); j <= 20 - std::abs(i); ++j) {
        Element p = g.multiply(P.rep, flat(g, i, j));
        auto d = g.distance(x, p);
        if (d < best) { best = d; argmin.clear(); }
        if (d == best) argmin.push_back(p);
      }
    ASSERT_EQ(argmin.size(), 1u);
    EXPECT_EQ(G.coset_projection(x, P), argmin[0]) << g.format(x) << " onto " << g.format(P.rep);
  }
}

TEST(RelHyp, ConedDistanceMatchesConedBfs) {
  // Coned graph restricted to the ball of radius 6 with flat jumps of norm <= 6.
  // Coned geodesics between points of norm <= 3 run through prefixes of their
  // normal forms, so the restriction loses nothing.
  auto sp = z2z();
  RelHypGroup G(sp);
  const auto& g = G.group();
  std::vector<Element> jumps;
  for (std::int64_t i = -6; i <= 6; ++i)
    for (std::int64_t j = -6 + std::abs(i); j <= 6 - std::abs(i); ++j)
      if (i != 0 || j != 0) jumps.push_back(flat(g, i, j));
  VertexMap<std::int64_t> dist{{sp->base(), 0}};
  std::deque<Element> q{Element{}};
  while (!q.empty()) {
    Element v = q.front();
    q.pop_front();
    auto d = dist[sp->vertex(v)];
    std::vector<Element> next;
    for (auto& w : sp->neighbors(sp->vertex(v))) next.push_back(sp->element(w));
    for (auto& j : jumps) next.push_back(g.multiply(v, j));
    for (auto& w : next) {
      if (g.norm(w) > 6) continue;
      if (dist.emplace(sp->vertex(w), d + 1).second) q.push_back(w);
    }
  }
  std::size_t checked = 0;
  for (auto& [v, d] : dist) {
    if (sp->norm(v) > 3) continue;
    ++checked;
    EXPECT_EQ(G.coned(Element{}, sp->element(v)), d) << sp->format(v);
  }
  EXPECT_GT(checked, 100u);
}

TEST(RelHyp, DistanceFormulaExamples) {
  auto sp = z2z();
  RelHypGroup G(sp);
  const auto& g = G.group();
  Element x = g.parse_word("t a^2"), y = g.multiply(x, flat(g, 3, 4));
  auto same = fit_distance_formula(G, {{x, x}}, 5, -1);
  EXPECT_EQ(same.rows[0].dG, 0);
  EXPECT_EQ(same.rows[0].S, 0);
  // one flat: d_P = 7, coned distance 1
  EXPECT_EQ(fit_distance_formula(G, {{x, y}}, 5, -1).rows[0].S, 8);
  EXPECT_EQ(fit_distance_formula(G, {{x, y}}, 10, -1).rows[0].S, 1);
  // tied constants: least M with 7 <= 2M and 8 <= 8M
  EXPECT_DOUBLE_EQ(fit_distance_formula(G, {{x, y}}, 10, -1).M, 3.5);
}

TEST(RelHyp, DeepComponentsMatchDefinition) {
  auto sp = z2z();
  RelHypGroup G(sp);
  const auto& g = G.group();
  Rng rng(5);
  const std::int64_t D = 1, R = 2;
  for (int k = 0; k < 40; ++k) {
    Element y = sp->element(sp->sample(rng, 30));
    PathSeg geo = sp->geodesic(Element{}, y);
    auto dec = deep_components(G, geo, D, R);
    std::set<std::size_t> got;
    for (auto& c : dec.components)
      for (auto i = c.begin; i <= c.end; ++i) got.insert(i);
    // p is deep iff some i < p < j have gamma_i, gamma_j within D of one flat
    // and p - i > R, j - p > R
    std::set<std::size_t> want;
    std::vector<Coset> cosets;
    for (std::size_t i = 0; i < geo.size(); ++i) {
      Element v = sp->element(geo.vertex(i));
      cosets.push_back(G.coset(0, v));
      for (auto& w : sp->neighbors(geo.vertex(i))) cosets.push_back(G.coset(0, sp->element(w)));
    }
    for (auto& P : cosets) {
      std::vector<std::size_t> near;
      for (std::size_t i = 0; i < geo.size(); ++i) {
        bool in = G.in_coset(sp->element(geo.vertex(i)), P);
        for (auto& w : sp->neighbors(geo.vertex(i))) in = in || G.in_coset(sp->element(w), P);
        if (in) near.push_back(i);
      }
      for (auto i : near)
        for (auto j : near)
          for (std::size_t p = i + R + 1; p + R < j; ++p) want.insert(p);
    }
    EXPECT_EQ(got, want) << g.format(y);
  }
}

TEST(RelHyp, FittedConstantsOnFreeProduct) {
  auto sp = z2z();
  RelHypGroup G(sp);
  auto fit = fit_constants(G, 6, 100, 3);
  EXPECT_EQ(fit.constants.D0, 0);
  EXPECT_EQ(fit.constants.R1, 1 + 4 * fit.constants.R0);
  EXPECT_GE(fit.constants.L, 2 * fit.constants.L0);
  EXPECT_GT(fit.lemma_checked, 0u);
  EXPECT_EQ(fit.lemma_violations, 0u);
}

TEST(RelHyp, LiftIsAPathWithTheSameEndpoints) {
  auto sp = z2z();
  RelHypGroup G(sp);
  Rng rng(17);
  for (int k = 0; k < 30; ++k) {
    Element x = sp->element(sp->sample(rng, 20)), y = sp->element(sp->sample(rng, 20));
    auto rep = G.coned_distance(x, y);
    EXPECT_EQ(static_cast<std::int64_t>(rep.path.size()) - 1, rep.distance);
    PathSeg lift = G.lift(rep);
    EXPECT_EQ(sp->element(lift.front()), x);
    EXPECT_EQ(sp->element(lift.back()), y);
    EXPECT_EQ(static_cast<std::int64_t>(lift.length()), G.word_distance(x, y));
  }
}
