#include "lln/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "lln/errors.hpp"
#include "lln/numeric.hpp"

namespace lln {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_n(long n) {
  if (n < 1) {
    throw DomainError("n must be a positive integer");
  }
}

void require_x_at_least(double x, double lo, const char* method) {
  if (!(x >= lo)) {
    std::ostringstream msg;
    msg << method << " is only established for x >= " << lo << " (got x = "
        << x << ")";
    throw DomainError(msg.str());
  }
}

double clamp_bound(double v) {
  if (std::isnan(v)) {
    throw NumericalError("bound evaluated to NaN");
  }
  return std::clamp(v, std::numeric_limits<double>::min(), 1.0);
}

Constant pick(Override o, double fallback) {
  return o ? Constant{*o, Provenance::User}
           : Constant{fallback, Provenance::ConfigDefault};
}

// int_v^inf x exp(v^q - x^q) dx, i.e. exp(v^q) times the Weibull-type
// layer integral, kept in one exponent for stability.
double scaled_layer_integral(double q, double v) {
  const double vq = std::pow(v, q);
  auto integrand = [&](double x) { return x * std::exp(vq - std::pow(x, q)); };
  // exp(v^q - x^q) < 1e-300 once x^q > v^q + 690.
  const double upper = std::pow(vq + 700.0, 1.0 / q);
  const double knee = std::max(v, 1.0);
  return numeric::integrate(integrand, v, knee) +
         numeric::integrate(integrand, knee, std::max(knee, upper));
}

BetaQ numeric_beta(double q) {
  BetaQ out;
  out.numeric = true;
  out.majorant = std::tgamma(2.0 / q) / (q * std::numbers::e);
  auto f = [&](double v) { return scaled_layer_integral(q, v); };
  constexpr double kWindow = 8.0;
  const auto r = numeric::scan_maximize(f, 0.0, kWindow, 256,
                                        numeric::Spacing::Linear, 1e-10);
  if (r.arg >= kWindow * (1.0 - 1.0 / 255.0) && f(4.0 * kWindow) > r.value) {
    std::ostringstream msg;
    msg << "beta(q) supremum is unbounded for q = " << q;
    throw NumericalError(msg.str());
  }
  out.value = r.value;
  out.argmax_v = r.arg;
  out.majorant_holds = out.value <= out.majorant * (1.0 + 1e-6);
  return out;
}

double overline_phi_value(const PhiFunction& phi, double lambda, long n_max) {
  double best = -kInf;
  for (long n = 1; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    best = std::max(best, nn * phi(lambda / std::sqrt(nn)));
  }
  return best;
}

}  // namespace

EnvelopeConjugate envelope_conjugate(const PhiFunction& phi, double u,
                                     long n_max) {
  constexpr int kTablePoints = 1025;
  if (u == 0.0) {
    return {};
  }
  double radius = std::max(1.0, 2.0 * u);
  for (int attempt = 0; attempt < 40; ++attempt) {
    const Tabulated table = tabulate_envelope(phi, n_max, radius, kTablePoints);
    const PhiFunction tabulated(table);
    const ConjugateResult coarse = legendre_transform_detail(tabulated, u);
    if (coarse.window_hit) {
      radius *= 2.0;
      continue;
    }
    const MembershipReport membership = check_phi_membership(tabulated);
    if (!membership.passed()) {
      throw NumericalError("envelope of " + phi.describe() +
                           " is not in class Phi: " + membership.summary());
    }
    const double step = radius / (kTablePoints - 1);
    const double lo = std::max(0.0, coarse.argmax - step);
    const double hi = coarse.argmax + step;
    auto objective = [&](double lambda) {
      return -(lambda * u - overline_phi_value(phi, lambda, n_max));
    };
    const auto fine = numeric::golden_section(objective, lo, hi, 1e-12 * hi);
    EnvelopeConjugate out;
    if (-fine.value >= coarse.value) {
      out.value = -fine.value;
      out.argmax = fine.arg;
    } else {
      out.value = coarse.value;
      out.argmax = coarse.argmax;
    }
    const EnvelopeValue env = overline_phi(phi, out.argmax, n_max);
    if (env.boundary_hit) {
      std::ostringstream msg;
      msg << "envelope supremum over n not captured at lambda = " << out.argmax
          << " (maximizing n is n_max = " << n_max << "); increase n_max";
      throw NumericalError(msg.str());
    }
    out.envelope_argmax_n = env.argmax;
    return out;
  }
  throw NumericalError("conjugate of the envelope not attained; phi may not "
                       "be superlinear");
}


std::string to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::Thm21: return "thm21";
    case BoundMethod::Ex21: return "ex21";
    case BoundMethod::Ex22: return "ex22";
    case BoundMethod::Moment: return "moment";
    case BoundMethod::MomentOpt: return "moment-opt";
    case BoundMethod::Thm41: return "thm41";
    case BoundMethod::Ex41: return "ex41";
    case BoundMethod::Inverse: return "inverse";
  }
  return "unknown";
}

std::optional<BoundMethod> bound_method_from_string(const std::string& s) {
  for (auto m : {BoundMethod::Thm21, BoundMethod::Ex21, BoundMethod::Ex22,
                 BoundMethod::Moment, BoundMethod::MomentOpt,
                 BoundMethod::Thm41, BoundMethod::Ex41, BoundMethod::Inverse}) {
    if (to_string(m) == s) {
      return m;
    }
  }
  return std::nullopt;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Paper: return "paper-specified";
    case Provenance::ConfigDefault: return "config-default";
    case Provenance::User: return "user";
    case Provenance::Derived: return "derived";
  }
  return "unknown";
}

BoundReport thm21_bound(const TailFunction& t, long n, double x) {
  require_n(n);
  require_x_at_least(x, 2.0, "thm21 (W-operator bound)");
  const double arg = x * std::sqrt(static_cast<double>(n));
  const InfimumResult w = w_operator(t, arg);
  BoundReport r;
  r.method = BoundMethod::Thm21;
  r.n = n;
  r.x = x;
  r.value = clamp_bound(w.value);
  r.parameters["W_argument"] = {arg, Provenance::Derived};
  r.parameters["v_argmin"] = {w.argmin, Provenance::Derived};
  r.notes.push_back("tail " + t.describe());
  if (w.boundary_hit) {
    r.notes.push_back("W infimum landed on the v search boundary");
  }
  return r;
}

double delta_q(double q) {
  if (!(q > 0.0)) {
    throw DomainError("delta(q) needs q > 0");
  }
  return std::pow(std::min(q / 2.0, 1.0), -1.0 / q);
}

BetaQ beta_q(double q, BetaMode mode) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw DomainError("beta(q) needs q > 0");
  }
  if (mode == BetaMode::Numeric || q > 2.0) {
    return numeric_beta(q);
  }
  const double e = std::numbers::e;
  BetaQ out;
  // Second argument reproduced exactly as published.
  out.value = std::max(std::tgamma(2.0 / q) / q, (e / q) * (2.0 / (e * q)));
  out.majorant = kInf;
  return out;
}

BoundReport ex21_bound(double Y, double K, double q, long n, double x,
                       BetaMode mode) {
  require_n(n);
  if (!(Y >= 1.0) || !(K > 0.0) || !(q > 0.0)) {
    throw DomainError("ex21 needs Y >= 1, K > 0, q > 0");
  }
  require_x_at_least(x, 2.0, "ex21 (Weibull-tail bound)");
  const double delta = delta_q(q);
  const BetaQ beta = beta_q(q, mode);
  const double nn = static_cast<double>(n);
  const double exponent = std::pow(nn, q / (q + 2.0)) *
                          std::pow(x / (K * delta), 2.0 * q / (q + 2.0));
  BoundReport r;
  r.method = BoundMethod::Ex21;
  r.n = n;
  r.x = x;
  r.value = clamp_bound((1.0 + 2.0 * Y * beta.value) * std::exp(-exponent));
  r.parameters["Y"] = {Y, Provenance::User};
  r.parameters["K"] = {K, Provenance::User};
  r.parameters["q"] = {q, Provenance::User};
  r.parameters["delta"] = {delta, Provenance::Paper};
  r.parameters["beta"] = {beta.value, beta.numeric ? Provenance::Derived
                                                   : Provenance::Paper};
  if (mode == BetaMode::Numeric) {
    r.notes.push_back("beta-q-alt: numeric supremum used for beta(q)");
  }
  if (beta.numeric && !beta.majorant_holds) {
    std::ostringstream msg;
    msg << "numeric beta(q) = " << beta.value
        << " exceeds the stated majorant Gamma(2/q)/(q e) = " << beta.majorant;
    r.notes.push_back(msg.str());
  }
  return r;
}

BoundReport ex22_bound(double C1, double C2, double K, double q, double r_exp,
                       long n, double x, Override C4) {
  require_n(n);
  if (!(C1 > 0.0) || !(C2 > 0.0) || !(K > 0.0) || !(q > 0.0) ||
      !std::isfinite(r_exp)) {
    throw DomainError("ex22 needs C1, C2, K, q > 0 and finite r");
  }
  require_x_at_least(x, 2.0, "ex22 (log-modified tail bound)");
  const double L1 = 2.0 * q / (q + 2.0);
  const double L2 = 2.0 * r_exp / (q + 2.0);
  const double F = L2 <= 0.0 ? 1.0 : std::exp(L1);
  const Constant c4 = pick(C4, 1.0);
  const double z = x * std::sqrt(static_cast<double>(n)) / K;
  const double G = c4.value * std::pow(z, L1) * std::pow(std::log(F + z), L2);
  BoundReport r;
  r.method = BoundMethod::Ex22;
  r.n = n;
  r.x = x;
  r.value = clamp_bound(std::exp(-G));
  r.parameters["C1"] = {C1, Provenance::User};
  r.parameters["C2"] = {C2, Provenance::User};
  r.parameters["K"] = {K, Provenance::User};
  r.parameters["q"] = {q, Provenance::User};
  r.parameters["r"] = {r_exp, Provenance::User};
  r.parameters["L1"] = {L1, Provenance::Paper};
  r.parameters["L2"] = {L2, Provenance::Paper};
  r.parameters["F"] = {F, Provenance::Paper};
  r.parameters["C4"] = c4;
  return r;
}

BoundReport moment_bound(double p, long n, double x,
                         const std::vector<double>& norms) {
  require_n(n);
  if (!(p >= 2.0)) {
    throw DomainError("moment bound needs p >= 2");
  }
  require_x_at_least(x, 1.0, "moment bound");
  if (norms.size() != static_cast<std::size_t>(n)) {
    throw DomainError("moment bound needs exactly n per-index p-norms");
  }
  double mean_sq = 0.0;
  for (double v : norms) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("p-norms must be finite and non-negative");
    }
    mean_sq += v * v;
  }
  mean_sq /= static_cast<double>(n);
  const double nn = static_cast<double>(n);
  // Work in logs; x^-p (p-1)^p n^{-p/2} m^{p/2} underflows easily.
  const double log_value = p * (std::log(p - 1.0) - std::log(x) -
                                0.5 * std::log(nn)) +
                           0.5 * p * std::log(mean_sq);
  BoundReport r;
  r.method = BoundMethod::Moment;
  r.n = n;
  r.x = x;
  r.value = mean_sq == 0.0 ? std::numeric_limits<double>::min()
                           : clamp_bound(std::exp(log_value));
  r.parameters["p"] = {p, Provenance::User};
  r.parameters["p_minus_1"] = {p - 1.0, Provenance::Paper};
  r.parameters["mean_sq_norm"] = {mean_sq, Provenance::Derived};
  return r;
}

OptimizedMoment optimized_moment_bound(double a, long n, double x,
                                       const NormFunction& norms) {
  require_n(n);
  if (!(a > 2.0)) {
    throw DomainError("optimized moment bound needs a > 2");
  }
  require_x_at_least(x, 1.0, "moment bound");
  constexpr double kEps = 1e-6;
  OptimizedMoment out;

  auto log_objective = [&](double p) {
    const auto v = norms(p);
    bool finite = v.size() == static_cast<std::size_t>(n);
    for (double e : v) {
      finite = finite && std::isfinite(e) && e >= 0.0;
    }
    if (!finite) {
      return kInf;
    }
    const double b = moment_bound(p, n, x, v).value;
    return std::log(b);
  };

  const double hi = a - kEps;
  double best_p = 2.0;
  double best = log_objective(2.0);
  if (!std::isfinite(best)) {
    out.excluded_p.push_back(2.0);
  }
  if (hi > 2.0) {
    constexpr int kGrid = 128;
    std::vector<double> grid(kGrid);
    std::size_t best_k = 0;
    double grid_best = kInf;
    for (int k = 0; k < kGrid; ++k) {
      const double p = 2.0 + (hi - 2.0) * k / (kGrid - 1);
      grid[static_cast<std::size_t>(k)] = p;
      const double v = log_objective(p);
      if (!std::isfinite(v)) {
        if (k > 0) {
          out.excluded_p.push_back(p);
        }
        continue;
      }
      if (v < grid_best) {
        grid_best = v;
        best_k = static_cast<std::size_t>(k);
      }
    }
    if (std::isfinite(grid_best)) {
      const double lo = grid[best_k == 0 ? 0 : best_k - 1];
      const double up = grid[std::min<std::size_t>(best_k + 1, kGrid - 1)];
      const auto fine = numeric::golden_section(log_objective, lo, up, 1e-10);
      if (fine.value < grid_best) {
        grid_best = fine.value;
        grid[best_k] = fine.arg;
      }
      if (grid_best < best) {
        best = grid_best;
        best_p = grid[best_k];
      }
    }
  }
  if (!std::isfinite(best)) {
    throw DomainError("optimized moment bound: norms diverge at every p");
  }
  out.argmin_p = best_p;
  out.report = moment_bound(best_p, n, x, norms(best_p));
  out.report.method = BoundMethod::MomentOpt;
  out.report.parameters["a"] = {a, Provenance::User};
  out.report.parameters["argmin_p"] = {best_p, Provenance::Derived};
  if (!out.excluded_p.empty()) {
    out.report.notes.push_back("p-norms diverged at " +
                               std::to_string(out.excluded_p.size()) +
                               " grid values of p; those were excluded");
  }
  return out;
}

BoundReport thm41_bound(const PhiFunction& phi, long n, double x, long n_max) {
  require_n(n);
  if (!(x >= 0.0)) {
    throw DomainError("thm41 needs x >= 0");
  }
  if (n_max < 1) {
    throw DomainError("thm41 needs n_max >= 1");
  }
  const double u = x * std::sqrt(static_cast<double>(n));
  const EnvelopeConjugate c = envelope_conjugate(phi, u, n_max);
  BoundReport r;
  r.method = BoundMethod::Thm41;
  r.n = n;
  r.x = x;
  r.value = clamp_bound(2.0 * std::exp(-c.value));
  r.parameters["prefactor"] = {2.0, Provenance::Paper};
  r.parameters["u"] = {u, Provenance::Derived};
  r.parameters["envelope_conjugate"] = {c.value, Provenance::Derived};
  r.parameters["lambda_argmax"] = {c.argmax, Provenance::Derived};
  r.parameters["envelope_argmax_n"] = {static_cast<double>(c.envelope_argmax_n),
                                       Provenance::Derived};
  r.parameters["n_max"] = {static_cast<double>(n_max), Provenance::ConfigDefault};
  r.notes.push_back("phi " + phi.describe());
  return r;
}

double gamma_q(double q) {
  if (!(q > 0.0)) {
    throw DomainError("gamma(q) needs q > 0");
  }
  return q >= 2.0 ? std::min(2.0, q) : 2.0 * q / (2.0 + q);
}

Ex41Calibration calibrate_ex41(double q) {
  static std::mutex mutex;
  static std::map<double, Ex41Calibration> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(q); it != cache.end()) {
      return it->second;
    }
  }
  Ex41Calibration cal;
  const double gamma = gamma_q(q);
  const PhiFunction phi = PhiFunction::phi_q(q);
  cal.C2 = kInf;
  for (int k = 0; k < cal.points; ++k) {
    const double u = cal.u_lo * std::pow(cal.u_hi / cal.u_lo,
                                         static_cast<double>(k) / (cal.points - 1));
    const double conj = envelope_conjugate(phi, u, 10000).value;
    const double ratio = conj / std::pow(u, gamma);
    if (ratio < cal.C2) {
      cal.C2 = ratio;
      cal.argmin_u = u;
    }
  }
  std::lock_guard lock(mutex);
  cache.emplace(q, cal);
  return cal;
}

BoundReport ex41_bound(double q, long n, double x, Override C1, Override C2) {
  require_n(n);
  if (!(q > 0.0) || !(x > 0.0)) {
    throw DomainError("ex41 needs q > 0 and x > 0");
  }
  const double gamma = gamma_q(q);
  BoundReport r;
  r.method = BoundMethod::Ex41;
  r.n = n;
  r.x = x;
  const Constant c1 = pick(C1, 2.0);
  Constant c2;
  if (C2) {
    c2 = {*C2, Provenance::User};
  } else {
    if (q < 1.0) {
      throw DomainError("ex41 calibration uses phi-q, which needs q >= 1; "
                        "pass C2 explicitly");
    }
    const Ex41Calibration cal = calibrate_ex41(q);
    c2 = {cal.C2, Provenance::ConfigDefault};
    r.parameters["calibration_u_lo"] = {cal.u_lo, Provenance::ConfigDefault};
    r.parameters["calibration_u_hi"] = {cal.u_hi, Provenance::ConfigDefault};
    r.parameters["calibration_argmin_u"] = {cal.argmin_u, Provenance::Derived};
    const double u = x * std::sqrt(static_cast<double>(n));
    if (u < cal.u_lo || u > cal.u_hi) {
      r.notes.push_back(
          "x sqrt(n) lies outside the calibration range; the envelope "
          "property is not guaranteed here");
    }
  }
  const double nn = static_cast<double>(n);
  r.value = clamp_bound(c1.value * std::exp(-c2.value * std::pow(x, gamma) *
                                            std::pow(nn, gamma / 2.0)));
  r.parameters["q"] = {q, Provenance::User};
  r.parameters["gamma"] = {gamma, Provenance::Paper};
  r.parameters["C1"] = c1;
  r.parameters["C2"] = c2;
  return r;
}

BoundReport inverse_tail_bound(double C1, double C2, double q, double x,
                               Override C3, Override C4) {
  if (!(C1 > 0.0) || !(C2 > 0.0) || !(q > 0.0)) {
    throw DomainError("inverse tail bound needs C1, C2, q > 0");
  }
  require_x_at_least(x, 2.0, "inverse exponential tail bound");
  const Constant c3 = pick(C3, C1);
  const Constant c4 = pick(C4, C2);
  const double expo = 2.0 * q / (q + 2.0);
  BoundReport r;
  r.method = BoundMethod::Inverse;
  r.n = 1;
  r.x = x;
  r.value = clamp_bound(c3.value * std::exp(-c4.value * std::pow(x, expo)));
  r.parameters["C1"] = {C1, Provenance::User};
  r.parameters["C2"] = {C2, Provenance::User};
  r.parameters["q"] = {q, Provenance::User};
  r.parameters["exponent"] = {expo, Provenance::Paper};
  r.parameters["C3"] = c3;
  r.parameters["C4"] = c4;
  r.notes.push_back("assumes i.i.d. differences");
  return r;
}

BoundReport inverse_power_bound(double C, double s, double x, Override C5) {
  if (!(C > 0.0) || !(s > 1.0)) {
    throw DomainError("inverse power bound needs C > 0 and s > 1");
  }
  require_x_at_least(x, 1.0, "inverse power tail bound");
  const Constant c5 = pick(C5, C * std::pow(2.0, s) * std::numbers::e);
  BoundReport r;
  r.method = BoundMethod::Inverse;
  r.n = 1;
  r.x = x;
  r.value = clamp_bound(c5.value * std::pow(x, -s));
  r.parameters["C"] = {C, Provenance::User};
  r.parameters["s"] = {s, Provenance::User};
  r.parameters["C5"] = c5;
  r.notes.push_back("assumes i.i.d. differences");
  return r;
}

}  // namespace lln
