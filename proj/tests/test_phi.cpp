#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lln/errors.hpp"
#include "lln/phi.hpp"

using namespace lln;

namespace {

PhiFunction tabulated_power(double p, double radius, int nodes) {
  std::vector<double> l(nodes);
  std::vector<double> v(nodes);
  for (int k = 0; k < nodes; ++k) {
    l[k] = radius * k / (nodes - 1);
    v[k] = std::pow(l[k], p);
  }
  return PhiFunction(Tabulated(l, v));
}

}  // namespace

TEST(PhiFunction, Values) {
  const auto q = PhiFunction::quadratic(0.5);
  EXPECT_DOUBLE_EQ(q(2.0), 2.0);
  EXPECT_DOUBLE_EQ(q(-2.0), 2.0);
  const auto p = PhiFunction::phi_q(3.0);
  EXPECT_DOUBLE_EQ(p(0.5), 0.25);
  EXPECT_DOUBLE_EQ(p(-2.0), 8.0);
  EXPECT_THROW(PhiFunction::phi_q(0.5), DomainError);
  EXPECT_THROW(PhiFunction::quadratic(0.0), DomainError);
}

TEST(PhiFunction, TabulatedIsEvenAndInfiniteOutside) {
  const auto t = tabulated_power(2.0, 4.0, 5);
  EXPECT_DOUBLE_EQ(t(1.5), 2.5);  // linear between 1 and 4
  EXPECT_DOUBLE_EQ(t(-1.5), 2.5);
  EXPECT_TRUE(std::isinf(t(5.0)));
  EXPECT_DOUBLE_EQ(t.domain_radius(), 4.0);
}

TEST(Membership, QuadraticPasses) {
  EXPECT_TRUE(check_phi_membership(PhiFunction::quadratic(1.0)).passed());
}

TEST(Membership, PhiQThreePasses) {
  EXPECT_TRUE(check_phi_membership(PhiFunction::phi_q(3.0)).passed());
}

TEST(Membership, ConcaveTableFailsConvexity) {
  const std::vector<double> l{0, 1, 2, 3};
  const std::vector<double> v{0, 2, 3, 3.5};
  const auto r = check_phi_membership(PhiFunction(Tabulated(l, v)));
  EXPECT_FALSE(r.convex);
  EXPECT_FALSE(r.passed());
}

TEST(Membership, PhiQOneHasAConcaveKink) {
  const auto r = check_phi_membership(PhiFunction::phi_q(1.0));
  EXPECT_FALSE(r.convex);
  EXPECT_FALSE(r.superlinear);
  EXPECT_TRUE(r.even);
}

TEST(Legendre, QuadraticClosedForms) {
  EXPECT_NEAR(legendre_transform(PhiFunction::quadratic(0.5), 3.0), 4.5, 1e-12);
  EXPECT_NEAR(legendre_transform(PhiFunction::quadratic(1.0), 2.0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(legendre_transform(PhiFunction::quadratic(1.0), 0.0), 0.0);
}

TEST(Legendre, PhiQThreeMatchesDenseGrid) {
  // sup over 1e6 + 1 equally spaced lambda in [0, 20]
  EXPECT_NEAR(legendre_transform(PhiFunction::phi_q(3.0), 5.0), 4.303314829, 1e-5);
}

TEST(Legendre, TabulatedUsesVertices) {
  const auto t = tabulated_power(2.0, 10.0, 11);
  // vertices k with k u - k^2; u = 3 -> k in {1, 2}: 2
  EXPECT_DOUBLE_EQ(legendre_transform(t, 3.0), 2.0);
}

TEST(Legendre, EvenAndConvex) {
  const auto p = PhiFunction::phi_q(3.0);
  const double h = 0.05;
  for (double u = 0.1; u < 6.0; u += 0.37) {
    const double c = legendre_transform(p, u);
    EXPECT_NEAR(c, legendre_transform(p, -u), 1e-12 * (1 + c));
    const double d2 = legendre_transform(p, u + h) - 2 * c + legendre_transform(p, u - h);
    EXPECT_GE(d2, -1e-8 * (1 + c));
  }
}

TEST(Legendre, InfiniteConjugateIsAnError) {
  // phi-q:1 grows linearly: the sup diverges for u > 1
  EXPECT_THROW(legendre_transform(PhiFunction::phi_q(1.0), 2.0), NumericalError);
}

TEST(DoubleConjugate, Tolerances) {
  EXPECT_LE(double_conjugate_check(PhiFunction::quadratic(0.5)), 1e-6);
  EXPECT_LE(double_conjugate_check(PhiFunction::quadratic(2.0)), 1e-5);
  EXPECT_LE(double_conjugate_check(PhiFunction::phi_q(4.0), 5.0), 1e-4);
}

TEST(Envelope, QuadraticTiesEverywhere) {
  const EnvelopeValue e = overline_phi(PhiFunction::quadratic(1.0), 3.0, 500);
  EXPECT_NEAR(e.value, 9.0, 9e-12);
  EXPECT_EQ(e.ties, 500);
  EXPECT_EQ(e.argmax, 1);
}

TEST(Envelope, QuarticPeaksAtOne) {
  const EnvelopeValue e = overline_phi(tabulated_power(4.0, 4.0, 4001), 2.0, 1000);
  EXPECT_NEAR(e.value, 16.0, 1e-12);
  EXPECT_EQ(e.argmax, 1);
  EXPECT_EQ(e.ties, 1);
}

TEST(Envelope, PhiQOneMatchesExhaustiveScan) {
  // n phi(10/sqrt(n)) = 10 sqrt(n) below n = 100 and 100 from there on
  const EnvelopeValue e = overline_phi(PhiFunction::phi_q(1.0), 10.0, 10000);
  EXPECT_NEAR(e.value, 100.0, 1e-10);
  EXPECT_EQ(e.argmax, 100);
  EXPECT_EQ(e.ties, 9901);
  EXPECT_FALSE(e.boundary_hit);
  EXPECT_NEAR(e.continuous_relaxation, 100.0, 1e-6);
}

TEST(Envelope, BoundaryHitReported) {
  // n phi(1/sqrt(n)) = n^0.25 for phi = |lambda|^1.5
  const EnvelopeValue e = overline_phi(tabulated_power(1.5, 2.0, 2001), 1.0, 50);
  EXPECT_TRUE(e.boundary_hit);
  EXPECT_EQ(e.argmax, 50);
}

TEST(ConjugateTable, InterpolatesAndRejectsOutside) {
  const ConjugateTable t(PhiFunction::quadratic(0.5), 4.0, 401);
  EXPECT_NEAR(t(2.0), 2.0, 1e-12);
  EXPECT_NEAR(t(-1.005), 1.005 * 1.005 / 2, 1e-4);
  EXPECT_THROW(t(5.0), DomainError);
}

TEST(NFunction, Values) {
  EXPECT_DOUBLE_EQ(n_function(PhiFunction::quadratic(1.0), 0.0), 0.0);
  EXPECT_NEAR(n_function(PhiFunction::quadratic(0.5), 1.0), std::exp(0.5) - 1, 1e-12);
  EXPECT_NEAR(n_function(PhiFunction::phi_q(2.0), 3.0), 8.487735836358526, 1e-9);
}

TEST(Bphi, BalancedSignsUnderHalfSquare) {
  std::vector<double> s(1000);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = k % 2 ? 1.0 : -1.0;
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.1 * k);
  // sqrt(max 2 log cosh(l) / l^2), attained at l = 0.1
  const BphiEstimate b = bphi_norm_estimate(s, PhiFunction::quadratic(0.5), grid);
  EXPECT_NEAR(b.tau, 0.9991685364988666, 1e-9);
  EXPECT_TRUE(b.dropped.empty());
}

TEST(Bphi, ScaleEquivariantWithRescaledGrid) {
  std::vector<double> s(1000);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = (k % 2 ? 1.0 : -1.0) * (1 + k % 3);
  std::vector<double> grid;
  std::vector<double> scaled_grid;
  std::vector<double> scaled(s.size());
  const double c = 3.0;
  for (int k = 1; k <= 20; ++k) {
    grid.push_back(0.1 * k);
    scaled_grid.push_back(0.1 * k / c);
  }
  for (std::size_t k = 0; k < s.size(); ++k) scaled[k] = c * s[k];
  const auto phi = PhiFunction::quadratic(0.5);
  const double t1 = bphi_norm_estimate(s, phi, grid).tau;
  const double t2 = bphi_norm_estimate(scaled, phi, scaled_grid).tau;
  EXPECT_NEAR(t2, c * t1, 1e-9 * c * t1);
}

TEST(Bphi, RejectsNonCenteredSample) {
  const std::vector<double> s(100, 1.0);
  const std::vector<double> grid{0.5, 1.0};
  EXPECT_THROW(bphi_norm_estimate(s, PhiFunction::quadratic(0.5), grid), DomainError);
}
