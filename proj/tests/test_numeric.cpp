#include <cmath>

#include <gtest/gtest.h>

#include "lln/numeric.hpp"

using namespace lln::numeric;

TEST(Numeric, ScanFindsInteriorMinimum) {
  auto f = [](double x) { return (x - 3.7) * (x - 3.7) + 1.0; };
  const ScanResult r = scan_minimize(f, 0.01, 100.0, 256, Spacing::Log);
  EXPECT_NEAR(r.arg, 3.7, 1e-5);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
  EXPECT_FALSE(r.boundary_hit);
}

TEST(Numeric, ScanFlagsBoundaryMinimum) {
  auto f = [](double x) { return x; };
  const ScanResult r = scan_minimize(f, 1.0, 10.0, 64, Spacing::Linear);
  EXPECT_TRUE(r.boundary_hit);
  EXPECT_DOUBLE_EQ(r.arg, 1.0);
}

TEST(Numeric, ScanMaximize) {
  auto f = [](double x) { return std::sin(x); };
  const ScanResult r = scan_maximize(f, 0.0, 3.0, 128, Spacing::Linear);
  EXPECT_NEAR(r.arg, M_PI / 2, 1e-5);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
}

TEST(Numeric, IntegrateGaussian) {
  auto f = [](double x) { return std::exp(-x * x / 2); };
  EXPECT_NEAR(integrate(f, -12.0, 12.0), std::sqrt(2 * M_PI), 1e-11);
}
