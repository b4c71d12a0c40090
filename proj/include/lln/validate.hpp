#pragma once

// Certification harness: Monte Carlo estimates against upper bounds,
// scaling-exponent regression for the adversarial lower bound, and
// weak-L_s (Lorentz) norms.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lln/bounds.hpp"
#include "lln/sim.hpp"
#include "lln/tails.hpp"

namespace lln {

struct GridPoint {
  long n = 1;
  double x = 0.0;
};

/// Bound value at (n, x). Must throw DomainError outside its domain.
using BoundFunction = std::function<BoundReport(long n, double x)>;

struct Scenario {
  Generator generator;
  std::string bound_method;
  BoundFunction bound;
  std::vector<GridPoint> grid;
  std::uint64_t replicas = 100000;
  std::uint64_t master_seed = 0;
  double confidence = 0.99;
  unsigned threads = 0;
};

/// Evaluates the bound at every grid point and validates the generator;
/// precondition violations surface here as DomainError.
void validate_scenario(const Scenario& scenario);

struct VerdictPoint {
  GridPoint point;
  BoundReport bound;
  MonteCarloEstimate estimate;
  bool pass = false;
  double margin = 0.0;  // bound - ci_high
};

struct Verdict {
  std::vector<VerdictPoint> points;
  bool passed = false;
};

/// pass <=> ci_high <= bound at every grid point.
Verdict validate_upper(const Scenario& scenario);

struct ExponentFit {
  double exponent = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct ScalingFit {
  double q = 0.0;
  /// Fit under the target exponent q/(q+2).
  ExponentFit primary;
  /// Fits under the comparison exponents q/2 and 1.
  std::vector<ExponentFit> alternatives;
  std::vector<std::pair<long, double>> used;
  std::vector<long> excluded;
  /// The target exponent's R^2 strictly beats every comparison exponent.
  bool primary_best = false;
};

/// OLS of -ln Q_n on n^a. Points with Q = 0 are excluded; fewer than four
/// remaining points is a DomainError.
ScalingFit fit_scaling(double q, std::span<const std::pair<long, double>> estimates);

/// OLS fit of -ln Q on n^exponent.
ExponentFit fit_exponent(double exponent,
                         std::span<const std::pair<long, double>> estimates);

struct LorentzValue {
  double value = 0.0;
  double argmax = 0.0;
  bool boundary_hit = false;
};

/// sup_x x^s T(x). Pareto tails use the closed form; other families use a
/// 1e4-point log grid over [1e-3, 1e3] * scale.
LorentzValue lorentz_norm(const TailFunction& t, double s);

/// sup over the jump points of the empirical two-sided tail of x^s T(x).
LorentzValue lorentz_norm(std::span<const double> sample, double s);

}  // namespace lln
