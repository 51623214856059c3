#include <gtest/gtest.h>

#include "coarselab/gauge.hpp"

using namespace coarselab;

// Constant kappa with D2 = 0: m2 = m4 = 1 and the defining inequality of A
// reduces to Q <= A, so every constant is a closed expression.
TEST(Gauge, ConstantKappaByHand) {
  auto k = kappa_from_tag("1");
  auto g = derive_gauge({3, 4, 0.5, 0, 1, 0}, k);
  // m0 = max{(q(q C2 + q + 1) + Q) / C1, 2 C2 (D1 + 1)/(q - 1), Q} = (3*4 + 4)/0.5
  EXPECT_DOUBLE_EQ(g.m0, 32);
  // m1 = q (C2 + 1)(D1 + 1)
  EXPECT_DOUBLE_EQ(g.m1, 6);
  EXPECT_DOUBLE_EQ(g.m2, 1);
  EXPECT_DOUBLE_EQ(g.m4, 1);
  EXPECT_DOUBLE_EQ(g.A, 4);
  // m3 = m0 m1 (1 + m2) + A m2
  EXPECT_DOUBLE_EQ(g.m3, 2 * 32 * 6 + 4);
  // mZ = (q m3 + Q + m0) m4
  EXPECT_DOUBLE_EQ(g.mZ, 1200);
  EXPECT_DOUBLE_EQ(g.C3, 9 + 12 + 4);
}

TEST(Gauge, ChainValuesForTreeAxis) {
  auto k = kappa_from_tag("1");
  auto a = derive_gauge({1.5, 0, 0.5, 0, 1, 0}, k);
  EXPECT_DOUBLE_EQ(a.m0, 7.5);
  EXPECT_DOUBLE_EQ(a.m1, 3);
  EXPECT_DOUBLE_EQ(a.A, 0);
  // 1.5 * (2 * 7.5 * 3) + 7.5
  EXPECT_DOUBLE_EQ(a.mZ, 75);
}

TEST(Gauge, TheoremRadiusSatisfiesItsInequality) {
  auto k = kappa_from_tag("log");
  auto g = derive_gauge({2, 1, 0.5, 1, 1, 0.5}, k);
  double r = 50;
  double R = theorem_radius(g, k, k, r);
  auto lhs = [&](double x) { return g.m0 * g.m1 * k(x) + g.m1 * k(x) + g.A * k(x); };
  auto rhs = [&](double x) { return (x - g.in.Q) / g.in.q - r; };
  EXPECT_LE(lhs(R), rhs(R) + 1e-9);
  EXPECT_GT(lhs(R - 1), rhs(R - 1));
}

TEST(Gauge, DerivedGaugeMonotoneInQ) {
  auto m = derived_gauge(0.5, 0, 1, 0, kappa_from_tag("1"));
  EXPECT_LE(m(1.5, 0), m(2, 0));
  EXPECT_LE(m(2, 0), m(3, 0));
  EXPECT_LE(m(2, 0), m(2, 4));
  EXPECT_DOUBLE_EQ(m(1.0, 0), m(1.5, 0));
}
