#pragma once

// Class-Phi functions, Young-Fenchel conjugation, the normed-sum envelope
// phi_bar(lambda) = sup_n n phi(lambda / sqrt(n)) and empirical B(phi) norms.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lln {

/// phi(lambda) = c lambda^2.
struct Quadratic {
  double c = 0.5;
};

/// phi(lambda) = lambda^2 for |lambda| <= 1, |lambda|^q beyond.
struct PhiQ {
  double q = 2.0;
};

/// Piecewise-linear phi through (lambda_k, phi_k), lambda_0 = 0, extended
/// evenly. Outside the table phi is +infinity, so the last node is the
/// domain radius.
class Tabulated {
 public:
  Tabulated(std::vector<double> lambda, std::vector<double> value);

  double operator()(double lambda) const;
  std::span<const double> lambda() const { return *lambda_; }
  std::span<const double> value() const { return *value_; }
  double radius() const { return lambda_->back(); }

 private:
  std::shared_ptr<const std::vector<double>> lambda_;
  std::shared_ptr<const std::vector<double>> value_;
};

class PhiFunction {
 public:
  using Family = std::variant<Quadratic, PhiQ, Tabulated>;

  explicit PhiFunction(Family family);

  static PhiFunction quadratic(double c) { return PhiFunction(Quadratic{c}); }
  static PhiFunction phi_q(double q) { return PhiFunction(PhiQ{q}); }

  double operator()(double lambda) const;
  /// Right derivative for the analytic families, empty for tables.
  std::optional<double> derivative(double lambda) const;
  /// Effective domain radius lambda_0 (infinite for analytic families).
  double domain_radius() const;
  /// True when phi is known to be convex by construction, which lets the
  /// conjugate use bisection on the derivative.
  bool convex_by_construction() const;

  const Family& family() const { return family_; }
  std::string describe() const;

 private:
  Family family_;
};

struct MembershipReport {
  bool even = false;
  bool zero_at_origin = false;
  bool convex = false;
  bool positive_curvature = false;
  bool superlinear = false;
  double curvature_at_zero = 0.0;
  /// Most negative scaled second difference seen on the grid.
  double worst_second_difference = 0.0;

  bool passed() const {
    return even && zero_at_origin && convex && positive_curvature &&
           superlinear;
  }
  std::string summary() const;
};

MembershipReport check_phi_membership(const PhiFunction& phi);

struct ConjugateResult {
  double value = 0.0;
  double argmax = 0.0;
  bool window_extended = false;
  /// The supremum was still on the window edge after extension.
  bool window_hit = false;
};

/// phi*(u) = sup_lambda (lambda u - phi(lambda)).
ConjugateResult legendre_transform_detail(const PhiFunction& phi, double u);
double legendre_transform(const PhiFunction& phi, double u);

/// max over lambda in [-lambda_max, lambda_max] of |phi**(lambda) - phi(lambda)|.
double double_conjugate_check(const PhiFunction& phi, double lambda_max = 5.0,
                              int points = 101);

struct EnvelopeValue {
  double value = 0.0;
  /// Smallest n attaining the maximum.
  long argmax = 1;
  /// Number of n in [1, n_max] tying with the maximum (relative 1e-12).
  long ties = 1;
  /// argmax == n_max, i.e. the supremum over n may not be captured.
  bool boundary_hit = false;
  /// sup over real t in [1, n_max] of t phi(lambda / sqrt(t)); cross-check.
  double continuous_relaxation = 0.0;
};

EnvelopeValue overline_phi(const PhiFunction& phi, double lambda, long n_max);

/// Envelope tabulated on `points` equally spaced nodes over [0, lambda_max].
Tabulated tabulate_envelope(const PhiFunction& phi, long n_max,
                            double lambda_max, int points);

/// phi* tabulated on [0, u_max]; linear interpolation, even in u.
class ConjugateTable {
 public:
  ConjugateTable(const PhiFunction& phi, double u_max, int points = 4096);

  double operator()(double u) const;
  std::span<const double> u() const { return u_; }
  std::span<const double> value() const { return value_; }

 private:
  std::vector<double> u_;
  std::vector<double> value_;
};

struct BphiEstimate {
  double tau = 0.0;
  /// Lambdas whose empirical log-MGF was not finite.
  std::vector<double> dropped;
};

/// Smallest tau on [1e-6, 1e3] (60 bisection steps) with
/// log(mean exp(lambda xi)) <= phi(lambda tau) for every lambda in the grid.
/// Requires |mean| <= 3 standard errors. Returns tau = 0 when the
/// inequality already holds at tau = 0.
BphiEstimate bphi_norm_estimate(std::span<const double> sample,
                                const PhiFunction& phi,
                                std::span<const double> lambda_grid);

/// Orlicz N-function exp(phi*(u)) - 1.
double n_function(const PhiFunction& phi, double u);

}  // namespace lln
