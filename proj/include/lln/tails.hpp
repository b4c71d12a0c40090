#pragma once

// Tail-function algebra: parametric and empirical tail functions, the
// product composition T v G, tail second moments and the W[T] operator.

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lln {

/// T(x) = min(1, Y exp(-(x/K)^q)).
struct Weibull {
  double Y = 1.0;
  double K = 1.0;
  double q = 1.0;
};

/// T(x) = min(1, C1 exp(-C2 (x/K)^q (log(F + x/K))^r)), F = 1 for r <= 0
/// and exp(q) for r > 0.
struct LogModified {
  double C1 = 1.0;
  double C2 = 1.0;
  double K = 1.0;
  double q = 1.0;
  double r = 0.0;
};

/// T(x) = min(1, x^-r).
struct Pareto {
  double r = 1.0;
};

/// T(x) = min(1, exp(-x^2 / (2 sigma^2))).
struct SubGaussian {
  double sigma = 1.0;
};

/// Two-sided tail of a finite sample: max(P(xi >= x), P(xi <= -x)),
/// with closed inequalities on both sides.
class EmpiricalTail {
 public:
  explicit EmpiricalTail(std::span<const double> sample);

  double operator()(double x) const;
  std::size_t size() const { return sorted_->size(); }
  double max_abs() const;
  std::span<const double> sorted_sample() const { return *sorted_; }

 private:
  std::shared_ptr<const std::vector<double>> sorted_;
};

class TailFunction {
 public:
  using Family =
      std::variant<Weibull, LogModified, Pareto, SubGaussian, EmpiricalTail>;

  /// Validates the family parameters; throws DomainError when invalid.
  explicit TailFunction(Family family);

  static TailFunction weibull(double Y, double K, double q) {
    return TailFunction(Weibull{Y, K, q});
  }
  static TailFunction log_modified(double C1, double C2, double K, double q,
                                   double r) {
    return TailFunction(LogModified{C1, C2, K, q, r});
  }
  static TailFunction pareto(double r) { return TailFunction(Pareto{r}); }
  static TailFunction sub_gaussian(double sigma) {
    return TailFunction(SubGaussian{sigma});
  }

  /// T(x) for x >= 0, clamped to [0, 1]. T(0) = 1 for every family.
  double operator()(double x) const;

  const Family& family() const { return family_; }
  std::string describe() const;

 private:
  Family family_;
};

double eval(const TailFunction& t, double x);

EmpiricalTail empirical_tail(std::span<const double> sample);

/// Value of an infimum search together with where it was attained.
struct InfimumResult {
  double value = 1.0;
  double argmin = 0.0;
  /// The minimizer sat on the edge of the search window.
  bool boundary_hit = false;
};

/// T v G (x) = min(1, 4 inf_{y>0} (T(y) + G(x/y))). The search runs over
/// y in sqrt(x) * [1e-3, 1e3], a window symmetric under y <-> x/y.
InfimumResult product_compose(const TailFunction& t, const TailFunction& g,
                              double x);

/// -int_v^inf x^2 dT(x), evaluated as v^2 T(v) + 2 int_v^inf x T(x) dx.
/// Throws InfiniteMomentError when the second moment diverges.
double tail_second_moment(const TailFunction& t, double v);

/// W[T](x) = min(1, inf_{v>0} [exp(-x^2/(8 v^2)) + tail_second_moment(T, v)])
/// with v searched in x * [1e-3, 1e3].
InfimumResult w_operator(const TailFunction& t, double x);

}  // namespace lln
