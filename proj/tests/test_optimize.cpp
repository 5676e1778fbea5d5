#include <gtest/gtest.h>

#include <cmath>

#include "keyrate/errors.hpp"
#include "keyrate/optimize.hpp"

using namespace keyrate;

TEST(GridGolden, InteriorMaximum) {
  const ScalarOptimum r = grid_golden_maximize([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 11, 1e-9);
  EXPECT_NEAR(r.x, 0.3, 1e-6);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(GridGolden, OffGridMaximum) {
  const ScalarOptimum r = grid_golden_maximize([](double x) { return std::sin(x); }, 0.0, 3.0, 7, 1e-9);
  EXPECT_NEAR(r.x, std::acos(0.0), 1e-6);
}

TEST(GridGolden, EndpointMaximum) {
  const ScalarOptimum hi = grid_golden_maximize([](double x) { return x; }, 0.0, 0.5, 65, 1e-7);
  EXPECT_EQ(hi.x, 0.5);
  const ScalarOptimum lo = grid_golden_minimize([](double x) { return x; }, 0.0, 0.5, 65, 1e-7);
  EXPECT_EQ(lo.x, 0.0);
  EXPECT_EQ(lo.value, 0.0);
}

TEST(GridGolden, TiesKeepSmallestX) {
  const ScalarOptimum r = grid_golden_maximize([](double) { return 1.0; }, 0.0, 1.0, 5, 1e-7);
  EXPECT_EQ(r.x, 0.0);
}

TEST(GridGolden, DegenerateInterval) {
  const ScalarOptimum r = grid_golden_maximize([](double x) { return x * x; }, 0.2, 0.2, 5, 1e-7);
  EXPECT_EQ(r.x, 0.2);
  EXPECT_THROW(grid_golden_maximize([](double x) { return x; }, 1.0, 0.0, 5, 1e-7), DomainError);
  EXPECT_THROW(grid_golden_maximize([](double x) { return x; }, 0.0, 1.0, 1, 1e-7), DomainError);
}

TEST(Bisection, FindsTransition) {
  const BisectionResult r = bisect_transition([](double x) { return x < 0.123456; }, 0.0, 0.25, 1e-5);
  EXPECT_LE(r.bracket_width, 1e-5);
  EXPECT_NEAR(r.x, 0.123456, 1e-5);
}

TEST(Bisection, RequiresSignChange) {
  EXPECT_THROW(bisect_transition([](double) { return true; }, 0.0, 1.0, 1e-5), NumericalError);
  EXPECT_THROW(bisect_transition([](double) { return false; }, 0.0, 1.0, 1e-5), NumericalError);
  EXPECT_THROW(bisect_transition([](double x) { return x < 0.5; }, 0.0, 1.0, 0.0), DomainError);
}
