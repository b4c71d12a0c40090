#include <cmath>
#include <vector>

#include <boost/math/special_functions/factorials.hpp>
#include <gtest/gtest.h>

#include "lln/errors.hpp"
#include "lln/rng.hpp"
#include "lln/sim.hpp"

using namespace lln;

namespace {

double normal_moment(int k) {
  return k % 2 ? 0.0 : boost::math::double_factorial<double>(k - 1);
}

bool within(const MonteCarloEstimate& e, double exact, double k_se) {
  const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(e.replicas));
  return std::abs(e.point - exact) <= k_se * se;
}

}  // namespace

TEST(DiscreteDist, ValidatesAndSamples) {
  EXPECT_THROW(DiscreteDist({1, -1}, {0.5, 0.6}), DomainError);
  EXPECT_THROW(DiscreteDist({1}, {-1}), DomainError);
  const DiscreteDist d({-1, 2}, {2.0 / 3, 1.0 / 3});
  EXPECT_NEAR(d.mean(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.sample(0.1), -1.0);
  EXPECT_DOUBLE_EQ(d.sample(0.9), 2.0);
  EXPECT_DOUBLE_EQ(d.max_abs(), 2.0);
}

TEST(GaussHermite, MatchesNormalMoments) {
  for (int m : {2, 3, 5, 8}) {
    const DiscreteDist d = gauss_hermite_distribution(m);
    EXPECT_EQ(d.values().size(), static_cast<std::size_t>(m));
    for (int k = 1; k <= 2 * m - 1; ++k) {
      EXPECT_NEAR(d.moment(k), normal_moment(k), 1e-10) << "m=" << m << " k=" << k;
    }
  }
}

TEST(GaussHermite, TwoPointLawIsRademacher) {
  const DiscreteDist d = gauss_hermite_distribution(2);
  EXPECT_NEAR(std::abs(d.values()[0]), 1.0, 1e-15);
  EXPECT_NEAR(d.probs()[0], 0.5, 1e-15);
}

TEST(GaussHermite, OrderSelection) {
  EXPECT_EQ(select_matching_order(2.5), 2);
  EXPECT_EQ(select_matching_order(3.0), 2);
  EXPECT_EQ(select_matching_order(1.2), 1);
  EXPECT_THROW(select_matching_order(0.5), DomainError);
  // smallest m with 2m - 1 >= s + 2
  EXPECT_EQ(matching_atoms(1), 2);
  EXPECT_EQ(matching_atoms(2), 3);
  EXPECT_EQ(matching_atoms(3), 3);
}

TEST(Weibull, MagnitudeTail) {
  // P(|eta| >= t) = exp(-t^q) under a uniform u
  constexpr int kNodes = 100000;
  for (double q : {0.5, 1.0, 2.0}) {
    for (double t : {0.3, 1.0, 2.5}) {
      int hits = 0;
      for (int k = 0; k < kNodes; ++k) {
        hits += sample_weibull_magnitude(q, (k + 0.5) / kNodes) >= t;
      }
      EXPECT_NEAR(static_cast<double>(hits) / kNodes, std::exp(-std::pow(t, q)), 2e-5);
    }
  }
}

TEST(Spec, Validation) {
  EXPECT_THROW(validate_spec({Rademacher{}, 0}), DomainError);
  EXPECT_THROW(validate_spec({IidDiscrete{DiscreteDist({1}, {1})}, 4}), DomainError);
  EXPECT_THROW(validate_spec({WeibullSym{-1}, 4}), DomainError);
  EXPECT_NO_THROW(validate_spec({IidDiscrete{DiscreteDist({0}, {1})}, 4}));
}

TEST(Paths, SumMatchesPathEnd) {
  const MartingaleSpec spec{ProductAdversarial{0.5, gauss_hermite_distribution(3)}, 20};
  ReplicaStream a(9, 3);
  ReplicaStream b(9, 3);
  const auto path = generate_path(spec, a);
  ASSERT_EQ(path.size(), 20u);
  EXPECT_DOUBLE_EQ(path.back(), simulate_sum(spec, b));
}

TEST(Paths, UniformIncrementsBounded) {
  const MartingaleSpec spec{UniformSym{0.5}, 200};
  ReplicaStream s(1, 1);
  const auto path = generate_path(spec, s);
  double prev = 0.0;
  for (double v : path) {
    EXPECT_LE(std::abs(v - prev), 0.5);
    prev = v;
  }
}

TEST(Paths, SignRulesReuseBaseDraws) {
  const long n = 100;
  ReplicaStream s0(5, 0);
  ReplicaStream s1(5, 0);
  ReplicaStream s2(5, 0);
  const auto plain = generate_path({ConditionalSubPhi{UniformSym{1.0}, SignRule::None}, n}, s0);
  const auto follow =
      generate_path({ConditionalSubPhi{UniformSym{1.0}, SignRule::FollowSign}, n}, s1);
  const auto oppose =
      generate_path({ConditionalSubPhi{UniformSym{1.0}, SignRule::OpposeSign}, n}, s2);
  double p_prev = 0.0, f_prev = 0.0, o_prev = 0.0;
  for (long i = 0; i < n; ++i) {
    const double base = plain[i] - p_prev;
    const double f_sign = f_prev >= 0.0 ? 1.0 : -1.0;
    const double o_sign = o_prev >= 0.0 ? -1.0 : 1.0;
    EXPECT_NEAR(follow[i] - f_prev, f_sign * base, 1e-12);
    EXPECT_NEAR(oppose[i] - o_prev, o_sign * base, 1e-12);
    p_prev = plain[i];
    f_prev = follow[i];
    o_prev = oppose[i];
  }
}

TEST(ClopperPearson, OracleValues) {
  auto [lo0, hi0] = clopper_pearson(0, 10000, 0.99);
  EXPECT_DOUBLE_EQ(lo0, 0.0);
  EXPECT_NEAR(hi0, 0.0005296914006061454, 1e-12);
  auto [lo1, hi1] = clopper_pearson(3, 100, 0.95);
  EXPECT_NEAR(lo1, 0.006229971538306397, 1e-12);
  EXPECT_NEAR(hi1, 0.08517605297428002, 1e-12);
  auto [lo2, hi2] = clopper_pearson(500, 1000, 0.99);
  EXPECT_NEAR(lo2, 0.4588525533070451, 1e-12);
  EXPECT_NEAR(hi2, 0.5411474466929549, 1e-12);
  EXPECT_DOUBLE_EQ(clopper_pearson(10, 10, 0.99).second, 1.0);
}

TEST(EstimateQ, RademacherTwoSteps) {
  // P(S(2)/2 > 1/2) = P(S(2) = 2) = 1/4
  const auto e = estimate_Q({Rademacher{}, 2}, 0.5, 200000, 17, 0.99);
  EXPECT_TRUE(within(e, 0.25, 4.0)) << e.point;
  EXPECT_LE(e.ci_low, e.point);
  EXPECT_GE(e.ci_high, e.point);
}

TEST(EstimateQ, SignRuleKeepsRandomWalkLaw) {
  // Q_4(1/4) = P(S(4) >= 2) = 5/16 for any predictable sign times Rademacher
  for (SignRule rule : {SignRule::None, SignRule::FollowSign, SignRule::OpposeSign}) {
    const auto e = estimate_Q({ConditionalSubPhi{Rademacher{}, rule}, 4}, 0.25, 200000, 3,
                              0.99);
    EXPECT_TRUE(within(e, 5.0 / 16, 4.0)) << e.point;
  }
}

TEST(EstimateQ, ProductAdversarialExact) {
  // 1/2 sum_k C(16,k) 2^-16 exp(-(16/|2k-16|)^(1/2))
  const MartingaleSpec spec{ProductAdversarial{0.5, gauss_hermite_distribution(2)}, 16};
  const auto e = estimate_Q(spec, 1.0, 200000, 99, 0.99);
  EXPECT_TRUE(within(e, 0.049704243419759084, 4.0)) << e.point;
}

TEST(EstimateQ, DegenerateIsZero) {
  const auto e = estimate_Q({IidDiscrete{DiscreteDist({0}, {1})}, 8}, 0.0, 1000, 1, 0.99);
  EXPECT_EQ(e.successes, 0u);
  EXPECT_DOUBLE_EQ(e.point, 0.0);
}

TEST(EstimateQ, ThreadCountDoesNotChangeCounts) {
  const MartingaleSpec spec{WeibullSym{1.0}, 32};
  const std::vector<double> xs{0.1, 0.3, 0.5};
  const auto a = estimate_Q_grid(spec, xs, 30001, 12345, 0.99, 1);
  const auto b = estimate_Q_grid(spec, xs, 30001, 12345, 0.99, 7);
  const auto c = estimate_Q_grid(spec, xs, 30001, 12346, 0.99, 3);
  ASSERT_EQ(a.size(), 3u);
  bool seed_matters = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].successes, b[k].successes);
    EXPECT_EQ(a[k].ci_high, b[k].ci_high);
    seed_matters = seed_matters || a[k].successes != c[k].successes;
  }
  EXPECT_TRUE(seed_matters);
  // Q decreases in x
  EXPECT_GE(a[0].successes, a[1].successes);
  EXPECT_GE(a[1].successes, a[2].successes);
}

TEST(LpNorm, RademacherSecondMoment) {
  // E (S(64)/8)^2 = 1
  const LpEstimate e =
      estimate_lp_norm({Rademacher{}, 64}, 2.0, 100000, 4, Normalization::SqrtN);
  EXPECT_NEAR(e.value, 1.0, 4 * e.bootstrap_se + 1e-3);
  EXPECT_GT(e.bootstrap_se, 0.0);
  const LpEstimate t1 =
      estimate_lp_norm({Rademacher{}, 64}, 2.0, 20000, 4, Normalization::N, 1);
  const LpEstimate t5 =
      estimate_lp_norm({Rademacher{}, 64}, 2.0, 20000, 4, Normalization::N, 5);
  EXPECT_EQ(t1.value, t5.value);
  EXPECT_EQ(t1.bootstrap_se, t5.bootstrap_se);
}
