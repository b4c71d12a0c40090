#pragma once

// Martingale-difference generators and Monte Carlo estimators of
// Q_n(x) = P(S(n)/n > x) and of normalized L_p norms of S(n).

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lln/rng.hpp"

namespace lln {

/// Finite discrete law. Probabilities are positive and sum to 1 (1e-12).
class DiscreteDist {
 public:
  DiscreteDist(std::vector<double> values, std::vector<double> probs);

  /// Inverse-CDF draw from a uniform u in (0, 1).
  double sample(double u) const;
  double moment(int k) const;
  double max_abs() const;
  double mean() const { return moment(1); }

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// m-atom law matching the standard normal moments of orders 0..2m-1
/// (probabilists' Gauss-Hermite nodes and weights).
DiscreteDist gauss_hermite_distribution(int m);

/// Unique integer s with q - 1 <= s < q, for q > 1.
int select_matching_order(double q);

/// Smallest m with 2m - 1 >= s + 2.
int matching_atoms(int s);

/// (-ln u)^{1/q}: P(result >= x) = exp(-x^q).
double sample_weibull_magnitude(double q, double u);

struct Rademacher {};

struct UniformSym {
  double half_width = 1.0;
};

/// Random sign times a magnitude with P(|xi| >= x) = exp(-x^q).
struct WeibullSym {
  double q = 1.0;
};

/// i.i.d. draws from a mean-zero discrete law.
struct IidDiscrete {
  DiscreteDist dist;
};

/// xi(i) = eta * zeta(i): eta symmetric with P(|eta| >= x) = exp(-x^q),
/// drawn once per path; zeta(i) i.i.d. from a bounded mean-zero law.
struct ProductAdversarial {
  double q = 0.5;
  DiscreteDist zeta;
};

enum class SignRule {
  None,        // epsilon(i) = +1
  FollowSign,  // epsilon(i) = sign(S(i-1)), sign(0) = +1
  OpposeSign,  // epsilon(i) = -sign(S(i-1))
};

using BaseGenerator = std::variant<Rademacher, UniformSym, WeibullSym, IidDiscrete>;

/// xi(i) = epsilon(i) * base(i) with epsilon predictable and the base
/// conditionally symmetric, so the base's conditional MGF bound carries over.
struct ConditionalSubPhi {
  BaseGenerator base;
  SignRule rule = SignRule::None;
};

using Generator = std::variant<Rademacher, UniformSym, WeibullSym, IidDiscrete,
                               ProductAdversarial, ConditionalSubPhi>;

struct MartingaleSpec {
  Generator generator;
  long n = 1;
};

/// Throws DomainError for invalid parameters (n < 1, non-centred laws, ...).
void validate_spec(const MartingaleSpec& spec);

std::string describe(const Generator& g);

/// Partial sums S(1..n) for one replica.
std::vector<double> generate_path(const MartingaleSpec& spec,
                                  ReplicaStream& stream);

/// S(n) only; same draws as generate_path.
double simulate_sum(const MartingaleSpec& spec, ReplicaStream& stream);

struct MonteCarloEstimate {
  std::uint64_t successes = 0;
  std::uint64_t replicas = 0;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  long n = 1;
  double x = 0.0;
};

/// Two-sided exact binomial interval.
std::pair<double, double> clopper_pearson(std::uint64_t successes,
                                          std::uint64_t trials,
                                          double confidence);

/// Worker count used when `threads` is 0.
unsigned default_threads();

/// Estimates Q_n(x) for every x in `xs` from the same replicas. Replica r
/// uses the stream (derive_key(master_seed, n), r); the result does not
/// depend on `threads`.
std::vector<MonteCarloEstimate> estimate_Q_grid(const MartingaleSpec& spec,
                                                std::span<const double> xs,
                                                std::uint64_t replicas,
                                                std::uint64_t master_seed,
                                                double confidence,
                                                unsigned threads = 0);

MonteCarloEstimate estimate_Q(const MartingaleSpec& spec, double x,
                              std::uint64_t replicas, std::uint64_t master_seed,
                              double confidence, unsigned threads = 0);

enum class Normalization { SqrtN, N };

struct LpEstimate {
  double value = 0.0;
  double bootstrap_se = 0.0;
  std::uint64_t replicas = 0;
};

/// (mean |S(n)/b(n)|^p)^{1/p} with b(n) = sqrt(n) or n, plus a bootstrap
/// standard error over 200 resamples.
LpEstimate estimate_lp_norm(const MartingaleSpec& spec, double p,
                            std::uint64_t replicas, std::uint64_t master_seed,
                            Normalization normalization, unsigned threads = 0);

}  // namespace lln
