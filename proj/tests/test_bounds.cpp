#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "lln/bounds.hpp"
#include "lln/errors.hpp"

using namespace lln;

TEST(Thm21, MatchesWOperatorOracle) {
  const auto sg = TailFunction::sub_gaussian(1.0);
  EXPECT_NEAR(thm21_bound(sg, 16, 2.0).value, 0.5299167, 1e-6);
  EXPECT_NEAR(thm21_bound(sg, 64, 2.0).value, 0.104163, 1e-6);
  EXPECT_NEAR(thm21_bound(sg, 16, 3.0).value, 0.245525, 1e-6);
}

TEST(Thm21, DomainAndMoments) {
  const auto sg = TailFunction::sub_gaussian(1.0);
  EXPECT_THROW(thm21_bound(sg, 16, 1.5), DomainError);
  EXPECT_THROW(thm21_bound(sg, 0, 2.0), DomainError);
  EXPECT_THROW(thm21_bound(TailFunction::pareto(1.5), 4, 2.0), InfiniteMomentError);
}

TEST(Thm21, MessageNamesRestriction) {
  try {
    thm21_bound(TailFunction::sub_gaussian(1.0), 4, 1.0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("x >= 2"), std::string::npos);
  }
}

TEST(Constants, DeltaAndGamma) {
  EXPECT_DOUBLE_EQ(delta_q(2.0), 1.0);
  EXPECT_DOUBLE_EQ(delta_q(1.0), 2.0);
  EXPECT_DOUBLE_EQ(delta_q(4.0), 1.0);
  EXPECT_DOUBLE_EQ(gamma_q(4.0), 2.0);
  EXPECT_DOUBLE_EQ(gamma_q(1.0), 2.0 / 3.0);
}

TEST(BetaQ, PrintedForSmallQ) {
  EXPECT_DOUBLE_EQ(beta_q(2.0).value, 0.5);
  EXPECT_DOUBLE_EQ(beta_q(1.0).value, 2.0);
  EXPECT_FALSE(beta_q(1.0).numeric);
}

TEST(BetaQ, NumericForLargeQViolatesMajorant) {
  // sup attained at v = 0: Gamma(2/q) / q
  const BetaQ b4 = beta_q(4.0);
  EXPECT_TRUE(b4.numeric);
  EXPECT_NEAR(b4.value, 0.443113462726379, 1e-8);
  EXPECT_NEAR(b4.majorant, 0.16301233304332305, 1e-12);
  EXPECT_FALSE(b4.majorant_holds);
  EXPECT_NEAR(beta_q(3.0).value, 0.4513726464754668, 1e-8);
}

TEST(BetaQ, NumericBelowTwoIsUnbounded) {
  EXPECT_THROW(beta_q(1.0, BetaMode::Numeric), NumericalError);
}

TEST(Ex21, ClosedForms) {
  EXPECT_NEAR(ex21_bound(1, 1, 2, 1, 2.0).value, 2 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(ex21_bound(2, 1, 1, 16, 2.0).value, 0.7242508110729287, 1e-14);
  EXPECT_THROW(ex21_bound(1, 1, 2, 1, 1.0), DomainError);
}

TEST(Ex21, MajorantNote) {
  const BoundReport r = ex21_bound(1, 1, 4, 4, 2.0);
  EXPECT_FALSE(r.notes.empty());
}

TEST(Ex22, Value) {
  // L1 = 1, L2 = 1/2, F = e, z = 4: exp(-4 sqrt(log(e + 4)))
  const BoundReport r = ex22_bound(1, 1, 1, 2, 1, 4, 2.0);
  EXPECT_NEAR(r.value, 0.004003338298439783, 1e-15);
  EXPECT_EQ(r.parameters.at("C4").provenance, Provenance::ConfigDefault);
  EXPECT_EQ(ex22_bound(1, 1, 1, 2, 1, 4, 2.0, 2.0).parameters.at("C4").provenance,
            Provenance::User);
  EXPECT_THROW(ex22_bound(1, 1, 1, 2, 1, 4, 1.0), DomainError);
}

TEST(Moment, Values) {
  EXPECT_DOUBLE_EQ(moment_bound(2, 4, 2.0, {1, 1, 1, 1}).value, 0.0625);
  // p = 4, n = 2, x = 4: 4^-4 * 3^4 * 2^-2 * ((1 + 4) / 2)^2
  EXPECT_NEAR(moment_bound(4, 2, 4.0, {1, 2}).value, 81 * 6.25 / 1024, 1e-15);
  EXPECT_DOUBLE_EQ(moment_bound(4, 2, 3.0, {1, 2}).value, 1.0);  // clamped
  EXPECT_THROW(moment_bound(1.5, 4, 2.0, {1, 1, 1, 1}), DomainError);
  EXPECT_THROW(moment_bound(2, 4, 2.0, {1, 1}), DomainError);
}

TEST(MomentOpt, NeverAboveTwo) {
  auto weibull_norms = [](double p) {
    return std::vector<double>(32, std::pow(boost::math::tgamma(p + 1), 1 / p));
  };
  const OptimizedMoment o = optimized_moment_bound(6.0, 32, 3.0, weibull_norms);
  const double m2 = moment_bound(2, 32, 3.0, weibull_norms(2)).value;
  EXPECT_LE(o.report.value, m2);
  EXPECT_GE(o.argmin_p, 2.0);
  EXPECT_LT(o.argmin_p, 6.0);
}

TEST(MomentOpt, DivergentNormsExcluded) {
  auto norms = [](double p) {
    return p > 3 ? std::vector<double>{} : std::vector<double>(8, 1.0);
  };
  const OptimizedMoment o = optimized_moment_bound(5.0, 8, 2.0, norms);
  EXPECT_FALSE(o.excluded_p.empty());
  EXPECT_LE(o.argmin_p, 3.0);
}

TEST(Thm41, QuadraticIsAzuma) {
  const auto phi = PhiFunction::quadratic(0.5);
  for (double x : {0.25, 0.5}) {
    const double closed = 2 * std::exp(-64 * x * x / 2);
    EXPECT_NEAR(thm41_bound(phi, 64, x).value, closed, 1e-6 * closed);
  }
  EXPECT_NEAR(thm41_bound(phi, 64, 0.25).value, 0.2706705664732254, 1e-12);
}

TEST(Thm41, PhiQFourEnvelopeIsPhi) {
  // phi-q:4 is its own envelope: n phi(l / sqrt(n)) <= phi(l)
  const auto phi = PhiFunction::phi_q(4.0);
  const double u = 5.0;
  const double expected = 2 * std::exp(-legendre_transform(phi, u));
  EXPECT_NEAR(thm41_bound(phi, 25, 1.0).value, expected, 1e-8 * expected);
}

TEST(Ex41, DefaultsEnvelopeThm41) {
  const Ex41Calibration cal = calibrate_ex41(4.0);
  EXPECT_GT(cal.C2, 0.0);
  const auto phi = PhiFunction::phi_q(4.0);
  for (double u : {0.5, 2.0, 7.0, 30.0}) {
    const double ex = ex41_bound(4.0, 1, u).value;
    const double th = thm41_bound(phi, 1, u).value;
    EXPECT_GE(ex, th * (1 - 1e-9)) << "u = " << u;
  }
  const BoundReport r = ex41_bound(4.0, 4, 1.0);
  EXPECT_EQ(r.parameters.at("C2").provenance, Provenance::ConfigDefault);
}

TEST(Ex41, SmallQNeedsExplicitC2) {
  EXPECT_THROW(ex41_bound(0.5, 4, 1.0), DomainError);
  const BoundReport r = ex41_bound(0.5, 4, 3.0, 2.0, 1.0);
  // gamma = 0.4: 2 exp(-3^0.4 * 4^0.2)
  EXPECT_NEAR(r.value, 2 * std::exp(-std::pow(3.0, 0.4) * std::pow(4.0, 0.2)), 1e-15);
}

TEST(Inverse, TailAndPower) {
  // q = 1: exponent 2/3
  EXPECT_NEAR(inverse_tail_bound(2, 0.5, 1, 3.0).value, 0.70687973688827, 1e-14);
  EXPECT_EQ(inverse_tail_bound(2, 0.5, 1, 3.0).parameters.at("C3").provenance,
            Provenance::ConfigDefault);
  EXPECT_THROW(inverse_tail_bound(2, 0.5, 1, 1.0), DomainError);
  // 1.5 * 2^3 * e * 4^-3
  EXPECT_NEAR(inverse_power_bound(1.5, 3, 4.0).value, 0.509677842836071, 1e-14);
  EXPECT_THROW(inverse_power_bound(1.5, 1, 4.0), DomainError);
}

TEST(BoundMethod, RoundTrip) {
  for (auto m : {BoundMethod::Thm21, BoundMethod::Ex21, BoundMethod::Ex22,
                 BoundMethod::Moment, BoundMethod::MomentOpt, BoundMethod::Thm41,
                 BoundMethod::Ex41, BoundMethod::Inverse}) {
    EXPECT_EQ(bound_method_from_string(to_string(m)), m);
  }
  EXPECT_FALSE(bound_method_from_string("nope").has_value());
}
