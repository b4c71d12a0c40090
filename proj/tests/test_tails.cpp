#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lln/errors.hpp"
#include "lln/tails.hpp"

using namespace lln;

TEST(TailFunction, FamiliesAndClamp) {
  const auto sg = TailFunction::sub_gaussian(1.0);
  EXPECT_DOUBLE_EQ(sg(0.0), 1.0);
  EXPECT_NEAR(sg(2.0), std::exp(-2.0), 1e-15);
  const auto wb = TailFunction::weibull(2.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(wb(0.5), 1.0);  // 2 e^-0.5 > 1
  EXPECT_NEAR(wb(3.0), 2 * std::exp(-3.0), 1e-15);
  const auto pa = TailFunction::pareto(3.0);
  EXPECT_DOUBLE_EQ(pa(0.5), 1.0);
  EXPECT_DOUBLE_EQ(pa(2.0), 0.125);
  EXPECT_EQ(sg.describe(), "subgaussian:1");
}

TEST(TailFunction, RejectsBadInput) {
  EXPECT_THROW(TailFunction::sub_gaussian(0.0), DomainError);
  EXPECT_THROW(TailFunction::weibull(1.0, -1.0, 1.0), DomainError);
  EXPECT_THROW(TailFunction::pareto(0.0), DomainError);
  EXPECT_THROW(TailFunction::sub_gaussian(1.0)(-1.0), DomainError);
}

TEST(TailFunction, LogModifiedUsesExpQOffset) {
  // C1 = C2 = K = q = r = 1: T(x) = min(1, exp(-x log(e + x))).
  const auto t = TailFunction::log_modified(1, 1, 1, 1, 1);
  EXPECT_NEAR(t(2.0), std::exp(-2.0 * std::log(M_E + 2.0)), 1e-15);
}

TEST(EmpiricalTail, TwoSidedClosedInequalities) {
  const std::vector<double> s{-3, -1, 0, 1, 2, 2};
  const auto t = empirical_tail(s);
  EXPECT_DOUBLE_EQ(t(0.0), 1.0);
  EXPECT_DOUBLE_EQ(t(1.0), 3.0 / 6);  // {1, 2, 2}
  EXPECT_DOUBLE_EQ(t(2.0), 2.0 / 6);
  EXPECT_DOUBLE_EQ(t(2.5), 1.0 / 6);  // {-3}
  EXPECT_DOUBLE_EQ(t(3.5), 0.0);
}

TEST(ProductCompose, ExponentialSelfComposition) {
  const auto e = TailFunction::weibull(1, 1, 1);
  const InfimumResult r = product_compose(e, e, 9.0);
  EXPECT_NEAR(r.value, 8 * std::exp(-3.0), 1e-6);
  EXPECT_NEAR(r.argmin, 3.0, 1e-3);
  EXPECT_FALSE(r.boundary_hit);
}

TEST(ProductCompose, SymmetricInArguments) {
  const auto a = TailFunction::sub_gaussian(1.0);
  const auto b = TailFunction::weibull(1, 2, 1);
  EXPECT_NEAR(product_compose(a, b, 20).value, product_compose(b, a, 20).value, 1e-9);
}

TEST(TailSecondMoment, SubGaussianAtZero) {
  // 2 int_0^inf x exp(-x^2/2) dx = 2
  EXPECT_NEAR(tail_second_moment(TailFunction::sub_gaussian(1.0), 0.0), 2.0, 1e-10);
}

TEST(TailSecondMoment, Exponential) {
  const auto e = TailFunction::weibull(1, 1, 1);
  EXPECT_NEAR(tail_second_moment(e, 0.0), 2.0, 1e-10);
  EXPECT_NEAR(tail_second_moment(e, 1.0), 1.8393972058572117, 1e-10);
}

TEST(TailSecondMoment, LogModified) {
  const auto t = TailFunction::log_modified(1, 1, 1, 1, 1);
  EXPECT_NEAR(tail_second_moment(t, 0.0), 0.917042871234055, 1e-9);
}

TEST(TailSecondMoment, ParetoClosedForm) {
  EXPECT_DOUBLE_EQ(tail_second_moment(TailFunction::pareto(3.0), 0.0), 3.0);
  EXPECT_DOUBLE_EQ(tail_second_moment(TailFunction::pareto(3.0), 2.0), 1.5);
  EXPECT_THROW(tail_second_moment(TailFunction::pareto(1.5), 1.0), InfiniteMomentError);
  EXPECT_THROW(tail_second_moment(TailFunction::pareto(2.0), 1.0), InfiniteMomentError);
}

TEST(TailSecondMoment, EmpiricalPiecewise) {
  const std::vector<double> s{-2, 1, 1, 3};
  // T = 3/4 on (0,1], 1/4 on (1,3], 0 beyond:
  // 2 (3/4 * 1/2 + 1/4 * (9 - 1) / 2) = 2.75
  EXPECT_NEAR(tail_second_moment(TailFunction(empirical_tail(s)), 0.0), 2.75, 1e-12);
  // v = 2: 4 T(2) + 2 int_2^3 x / 4 = 1 + 5/4
  EXPECT_NEAR(tail_second_moment(TailFunction(empirical_tail(s)), 2.0), 2.25, 1e-12);
}

TEST(WOperator, SubGaussianOracle) {
  const auto sg = TailFunction::sub_gaussian(1.0);
  EXPECT_NEAR(w_operator(sg, 8.0).value, 0.5299167, 1e-6);
  EXPECT_NEAR(w_operator(sg, 12.0).value, 0.245525, 1e-6);
  EXPECT_NEAR(w_operator(sg, 16.0).value, 0.104163, 1e-6);
  EXPECT_NEAR(w_operator(sg, 20.0).value, 0.042620, 1e-6);
  EXPECT_NEAR(w_operator(sg, 8.0).argmin, 3.125, 2e-3);
}

TEST(WOperator, MonotoneAndBounded) {
  const auto sg = TailFunction::sub_gaussian(1.0);
  double prev = 1.0;
  for (double x = 2.0; x <= 40.0; x += 2.0) {
    const double w = w_operator(sg, x).value;
    EXPECT_LE(w, prev + 1e-12);
    EXPECT_GE(w, 0.0);
    prev = w;
  }
}

TEST(WOperator, InfiniteMomentFailsFast) {
  EXPECT_THROW(w_operator(TailFunction::pareto(1.5), 4.0), InfiniteMomentError);
}
