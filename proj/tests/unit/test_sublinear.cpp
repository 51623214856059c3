#include <gtest/gtest.h>

#include <cmath>

#include "coarselab/sublinear.hpp"

using namespace coarselab;

TEST(Sublinear, LinearTagRejected) {
  EXPECT_THROW(kappa_from_tag("linear"), NotSublinear);
  EXPECT_THROW(kappa_from_tag("t"), NotSublinear);
  EXPECT_THROW(kappa_from_tag("t^1.5"), std::invalid_argument);
}

TEST(Sublinear, RegisteredTagsScaleSublinearly) {
  for (auto& tag : registered_tags()) {
    auto f = kappa_from_tag(tag);
    for (double lambda : {1.0, 1.5, 2.0, 10.0, 1000.0})
      for (double t = 1e-3; t < 1e6; t *= 1.7) EXPECT_LE(f(lambda * t), lambda * f(t) + 1e-9) << tag << " t=" << t;
  }
}

TEST(Sublinear, AtLeastOneAndMonotone) {
  for (auto& tag : registered_tags()) {
    auto f = kappa_from_tag(tag);
    double prev = 0;
    for (double t = 0; t < 1e5; t = t * 1.3 + 0.1) {
      EXPECT_GE(f(t), 1 - 1e-12) << tag;
      EXPECT_GE(f(t), prev - 1e-12) << tag;
      prev = f(t);
    }
  }
}

TEST(Sublinear, SqrtEnvelopeValues) {
  auto f = kappa_from_tag("sqrt");
  // concave envelope of max(1, sqrt t): chord 1 + t/4 up to the tangent point 4
  EXPECT_NEAR(f(0), 1, 1e-12);
  EXPECT_NEAR(f(1), 1.25, 1e-12);
  EXPECT_NEAR(f(4), 2, 1e-12);
  EXPECT_NEAR(f(9), 3, 1e-12);
  EXPECT_NEAR(kappa_from_tag("log")(0), 1, 1e-12);
  EXPECT_NEAR(kappa_from_tag("log")(std::exp(2.0) - std::exp(1.0)), 2, 1e-12);
}

TEST(Sublinear, LeastSmallRadiusMatchesScan) {
  for (auto& tag : {"1", "log", "sqrt"}) {
    auto f = kappa_from_tag(tag);
    for (double D : {0.5, 1.0, 3.0, 7.5, 20.0}) {
      double r = 1;
      while (D > r / (2 * f(r)) + 1e-9) r += 1;
      EXPECT_EQ(least_small_radius(D, f), r) << tag << " D=" << D;
    }
  }
  EXPECT_EQ(least_small_radius(75, kappa_from_tag("1")), 150);
}

TEST(Sublinear, EstimationConstantConstantKappa) {
  auto e = estimation_constant(kappa_from_tag("1"), 3);
  EXPECT_DOUBLE_EQ(e.m, 1);
}
