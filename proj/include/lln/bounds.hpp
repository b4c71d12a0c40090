#pragma once

// Upper bounds on Q_n(x) = P(S(n)/n > x) for martingale sums.
//
// Every bound returns a BoundReport carrying the value together with each
// constant used and where that constant came from. Constants the theory
// proves to exist but never pins are config parameters with documented
// defaults, tagged Provenance::ConfigDefault unless the caller overrides.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lln/phi.hpp"
#include "lln/tails.hpp"

namespace lln {

enum class BoundMethod { Thm21, Ex21, Ex22, Moment, MomentOpt, Thm41, Ex41, Inverse };

std::string to_string(BoundMethod m);
std::optional<BoundMethod> bound_method_from_string(const std::string& s);

enum class Provenance {
  Paper,          // fixed by the published formula
  ConfigDefault,  // unnamed constant, library default
  User,           // supplied by the caller
  Derived,        // computed from other inputs
};

std::string to_string(Provenance p);

struct Constant {
  double value = 0.0;
  Provenance provenance = Provenance::Paper;
};

struct BoundReport {
  BoundMethod method = BoundMethod::Thm21;
  long n = 1;
  double x = 0.0;
  double value = 1.0;
  std::map<std::string, Constant> parameters;
  std::vector<std::string> notes;
};

/// A constant the caller may override; unset means "use the default".
using Override = std::optional<double>;

/// W-operator bound: Q_n(x) <= W[T](x sqrt(n)), for x >= 2.
BoundReport thm21_bound(const TailFunction& t, long n, double x);

/// delta(q) = min(q/2, 1)^(-1/q).
double delta_q(double q);

enum class BetaMode {
  Printed,  // closed form for q <= 2, numeric supremum for q > 2
  Numeric,  // numeric supremum for every q ("beta-q-alt")
};

struct BetaQ {
  double value = 0.0;
  bool numeric = false;
  /// Gamma(2/q)/(q e); only meaningful for q > 2.
  double majorant = 0.0;
  bool majorant_holds = true;
  double argmax_v = 0.0;
};

/// beta(q). For q <= 2 the printed max(Gamma(2/q)/q, (e/q)(2/(e q))).
/// Otherwise sup_{v>=0} exp(v^q) int_v^inf x exp(-x^q) dx by scan plus
/// quadrature. Throws NumericalError when that supremum is unbounded.
BetaQ beta_q(double q, BetaMode mode = BetaMode::Printed);

/// (1 + 2 Y beta(q)) exp(-n^{q/(q+2)} (x/(K delta))^{2q/(q+2)}), x >= 2.
BoundReport ex21_bound(double Y, double K, double q, long n, double x,
                       BetaMode mode = BetaMode::Printed);

/// exp(-C4 (x sqrt(n)/K)^{L1} (log(F(L1,L2) + x sqrt(n)/K))^{L2}), x >= 2,
/// with L1 = 2q/(q+2), L2 = 2r/(q+2). C1, C2 describe the input tail and
/// are recorded but do not enter the printed bound.
BoundReport ex22_bound(double C1, double C2, double K, double q, double r,
                       long n, double x, Override C4 = std::nullopt);

/// x^-p (p-1)^p n^{-p/2} (mean of norms^2)^{p/2}; p >= 2, x >= 1.
BoundReport moment_bound(double p, long n, double x,
                         const std::vector<double>& norms);

/// Per-index p-norms as a function of p. An empty vector or any
/// non-finite entry marks p as divergent.
using NormFunction = std::function<std::vector<double>(double p)>;

struct OptimizedMoment {
  BoundReport report;
  double argmin_p = 2.0;
  std::vector<double> excluded_p;
};

/// inf over p in [2, a) of moment_bound: 128-point grid on [2, a - eps]
/// with golden-section refinement.
OptimizedMoment optimized_moment_bound(double a, long n, double x,
                                       const NormFunction& norms);

struct EnvelopeConjugate {
  double value = 0.0;
  double argmax = 0.0;
  long envelope_argmax_n = 1;
};

/// phi_bar*(u) from a tabulated envelope, refined on the exact envelope.
/// Throws NumericalError if the envelope fails membership or its sup over
/// n is not captured by n_max.
EnvelopeConjugate envelope_conjugate(const PhiFunction& phi, double u,
                                     long n_max);

/// 2 exp(-phi_bar*(x sqrt(n))) with phi_bar the envelope over n <= n_max,
/// tabulated and conjugated. Throws NumericalError when the envelope's
/// maximizing n sits on n_max at the conjugate's maximizer.
BoundReport thm41_bound(const PhiFunction& phi, long n, double x,
                        long n_max = 10000);

/// gamma(q) = min(2, q) for q >= 2, 2q/(2+q) for q in (0, 2).
double gamma_q(double q);

/// C1 exp(-C2 x^gamma n^{gamma/2}). By default C1 = 2 and C2 is calibrated
/// as min over u in [0.5, 50] of phi_bar*(u)/u^gamma for phi = PhiQ(q), so
/// that the bound envelopes thm41_bound there.
BoundReport ex41_bound(double q, long n, double x, Override C1 = std::nullopt,
                       Override C2 = std::nullopt);

struct Ex41Calibration {
  double C1 = 2.0;
  double C2 = 0.0;
  double u_lo = 0.5;
  double u_hi = 50.0;
  int points = 16;
  double argmin_u = 0.0;
};

Ex41Calibration calibrate_ex41(double q);

/// Single-summand tail from a normed-sum exponential bound:
/// C3 exp(-C4 x^{2q/(q+2)}), x >= 2. C3, C4 default to C1, C2.
BoundReport inverse_tail_bound(double C1, double C2, double q, double x,
                               Override C3 = std::nullopt,
                               Override C4 = std::nullopt);

/// Single-summand tail from a power bound: C5 x^-s, x >= 1.
/// C5 defaults to C 2^s e.
BoundReport inverse_power_bound(double C, double s, double x,
                                Override C5 = std::nullopt);

}  // namespace lln
