#include "lln/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lln/errors.hpp"
#include "lln/numeric.hpp"

namespace lln {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double envelope_term(const PhiFunction& phi, double lambda, double n) {
  return n * phi(lambda / std::sqrt(n));
}

// Envelope without the continuous-relaxation cross-check.
EnvelopeValue envelope_scan(const PhiFunction& phi, double lambda, long n_max) {
  std::vector<double> values(static_cast<std::size_t>(n_max));
  double best = -kInf;
  for (long n = 1; n <= n_max; ++n) {
    const double v = envelope_term(phi, lambda, static_cast<double>(n));
    values[static_cast<std::size_t>(n - 1)] = v;
    best = std::max(best, v);
  }
  const double floor = best > 0.0 ? best * (1.0 - kTieTol) : best;
  EnvelopeValue out;
  out.value = best;
  out.ties = 0;
  out.argmax = n_max;
  for (long n = n_max; n >= 1; --n) {
    if (values[static_cast<std::size_t>(n - 1)] >= floor) {
      ++out.ties;
      out.argmax = n;
    }
  }
  out.boundary_hit = out.argmax == n_max;
  return out;
}

ConjugateResult conjugate_by_bisection(const PhiFunction& phi, double u) {
  double hi = 1.0;
  while (*phi.derivative(hi) < u) {
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw NumericalError("conjugate: derivative never reaches u");
    }
  }
  double lo = 0.0;
  for (int i = 0; i < 300 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (*phi.derivative(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double at_lo = lo * u - phi(lo);
  const double at_hi = hi * u - phi(hi);
  return at_lo >= at_hi ? ConjugateResult{at_lo, lo, false, false}
                        : ConjugateResult{at_hi, hi, false, false};
}

ConjugateResult conjugate_on_table(const Tabulated& t, double u) {
  const auto lambda = t.lambda();
  const auto value = t.value();
  ConjugateResult out{-kInf, 0.0, false, false};
  std::size_t best = 0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double v = lambda[k] * u - value[k];
    if (v > out.value) {
      out.value = v;
      out.argmax = lambda[k];
      best = k;
    }
  }
  out.window_hit = best + 1 == lambda.size() && lambda.size() > 1;
  return out;
}

ConjugateResult conjugate_by_scan(const PhiFunction& phi, double u) {
  auto objective = [&](double lambda) { return lambda * u - phi(lambda); };
  double window = std::max(1.0, 2.0 * u);
  ConjugateResult out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    constexpr int kPoints = 512;
    const auto r = numeric::scan_maximize(objective, 0.0, window, kPoints,
                                          numeric::Spacing::Linear, 1e-12);
    out.value = r.value;
    out.argmax = r.arg;
    out.window_hit = r.arg >= window * (1.0 - 1.0 / (kPoints - 1));
    if (!out.window_hit) {
      break;
    }
    if (attempt == 0) {
      out.window_extended = true;
      window *= 10.0;
    }
  }
  return out;
}

}  // namespace

Tabulated::Tabulated(std::vector<double> lambda, std::vector<double> value) {
  if (lambda.size() < 2 || lambda.size() != value.size()) {
    throw DomainError("tabulated phi needs >= 2 (lambda, phi) pairs");
  }
  if (lambda.front() != 0.0) {
    throw DomainError("tabulated phi must start at lambda = 0");
  }
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    if (!std::isfinite(lambda[k]) || !std::isfinite(value[k])) {
      throw DomainError("tabulated phi contains a non-finite entry");
    }
    if (k > 0 && !(lambda[k] > lambda[k - 1])) {
      throw DomainError("tabulated phi lambdas must be strictly increasing");
    }
  }
  lambda_ = std::make_shared<const std::vector<double>>(std::move(lambda));
  value_ = std::make_shared<const std::vector<double>>(std::move(value));
}

double Tabulated::operator()(double lambda) const {
  const double a = std::abs(lambda);
  const auto& l = *lambda_;
  const auto& v = *value_;
  if (a > l.back()) {
    return kInf;
  }
  auto it = std::upper_bound(l.begin(), l.end(), a);
  if (it == l.end()) {
    return v.back();
  }
  const auto k = static_cast<std::size_t>(it - l.begin());
  const double w = (a - l[k - 1]) / (l[k] - l[k - 1]);
  return v[k - 1] + w * (v[k] - v[k - 1]);
}

PhiFunction::PhiFunction(Family family) : family_(std::move(family)) {
  if (const auto* q = std::get_if<Quadratic>(&family_)) {
    if (!(q->c > 0.0) || !std::isfinite(q->c)) {
      throw DomainError("quadratic phi needs c > 0");
    }
  } else if (const auto* p = std::get_if<PhiQ>(&family_)) {
    if (!(p->q >= 1.0) || !std::isfinite(p->q)) {
      throw DomainError("phi-q needs q >= 1");
    }
  }
}

double PhiFunction::operator()(double lambda) const {
  return std::visit(
      Overloaded{[lambda](const Quadratic& q) { return q.c * lambda * lambda; },
                 [lambda](const PhiQ& p) {
                   const double a = std::abs(lambda);
                   return a <= 1.0 ? a * a : std::pow(a, p.q);
                 },
                 [lambda](const Tabulated& t) { return t(lambda); }},
      family_);
}

std::optional<double> PhiFunction::derivative(double lambda) const {
  if (const auto* q = std::get_if<Quadratic>(&family_)) {
    return 2.0 * q->c * lambda;
  }
  if (const auto* p = std::get_if<PhiQ>(&family_)) {
    const double a = std::abs(lambda);
    const double d = a < 1.0 ? 2.0 * a : p->q * std::pow(a, p->q - 1.0);
    return lambda < 0.0 ? -d : d;
  }
  return std::nullopt;
}

double PhiFunction::domain_radius() const {
  if (const auto* t = std::get_if<Tabulated>(&family_)) {
    return t->radius();
  }
  return kInf;
}

bool PhiFunction::convex_by_construction() const {
  if (std::holds_alternative<Quadratic>(family_)) {
    return true;
  }
  if (const auto* p = std::get_if<PhiQ>(&family_)) {
    return p->q >= 2.0;
  }
  return false;
}

std::string PhiFunction::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{[&](const Quadratic& q) { out << "quadratic:" << q.c; },
                        [&](const PhiQ& p) { out << "phi-q:" << p.q; },
                        [&](const Tabulated& t) {
                          out << "tabulated:" << t.lambda().size()
                              << " nodes, radius " << t.radius();
                        }},
             family_);
  return out.str();
}

std::string MembershipReport::summary() const {
  std::ostringstream out;
  auto flag = [](bool b) { return b ? "pass" : "FAIL"; };
  out << "even=" << flag(even) << " phi(0)=0=" << flag(zero_at_origin)
      << " convex=" << flag(convex)
      << " curvature@0=" << flag(positive_curvature) << " ("
      << curvature_at_zero << ")"
      << " superlinear=" << flag(superlinear);
  return out.str();
}

MembershipReport check_phi_membership(const PhiFunction& phi) {
  MembershipReport r;
  const double radius = phi.domain_radius();
  const double limit = std::isfinite(radius) ? radius : 10.0;
  constexpr int kHalf = 1000;
  const double h = limit / kHalf;

  r.zero_at_origin = std::abs(phi(0.0)) <= 1e-15;

  r.even = true;
  for (int i = 1; i <= kHalf; ++i) {
    const double l = h * i;
    const double a = phi(l);
    const double b = phi(-l);
    if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) {
      r.even = false;
    }
  }

  r.convex = true;
  r.worst_second_difference = kInf;
  for (int i = -kHalf + 1; i <= kHalf - 1; ++i) {
    const double l = h * i;
    const double mid = phi(l);
    const double d2 = phi(l - h) + phi(l + h) - 2.0 * mid;
    const double scale = std::max({1.0, std::abs(mid), std::abs(phi(l + h))});
    r.worst_second_difference = std::min(r.worst_second_difference, d2 / scale);
    if (d2 < -1e-10 * scale) {
      r.convex = false;
    }
  }

  constexpr double kStep = 1e-4;
  r.curvature_at_zero =
      (phi(kStep) + phi(-kStep) - 2.0 * phi(0.0)) / (kStep * kStep);
  r.positive_curvature =
      std::isfinite(r.curvature_at_zero) && r.curvature_at_zero > 0.0;

  // phi(lambda)/lambda strictly increasing over the last decade of the grid.
  r.superlinear = true;
  double prev = -kInf;
  for (int i = kHalf / 10; i <= kHalf; ++i) {
    const double l = h * i;
    const double ratio = phi(l) / l;
    if (!(ratio > prev)) {
      r.superlinear = false;
    }
    prev = ratio;
  }
  return r;
}

ConjugateResult legendre_transform_detail(const PhiFunction& phi, double u) {
  if (std::isnan(u)) {
    throw DomainError("conjugate argument is NaN");
  }
  const double a = std::abs(u);
  if (const auto* t = std::get_if<Tabulated>(&phi.family())) {
    return conjugate_on_table(*t, a);
  }
  if (a == 0.0) {
    return {0.0, 0.0, false, false};
  }
  if (phi.convex_by_construction() && phi.derivative(1.0)) {
    return conjugate_by_bisection(phi, a);
  }
  return conjugate_by_scan(phi, a);
}

double legendre_transform(const PhiFunction& phi, double u) {
  const auto r = legendre_transform_detail(phi, u);
  if (r.window_hit && !std::holds_alternative<Tabulated>(phi.family())) {
    std::ostringstream msg;
    msg << "conjugate of " << phi.describe() << " at u=" << u
        << " not attained inside the search window (lambda up to "
        << r.argmax << "); the supremum may be infinite";
    throw NumericalError(msg.str());
  }
  return r.value;
}

double double_conjugate_check(const PhiFunction& phi, double lambda_max,
                              int points) {
  if (!(lambda_max > 0.0) || points < 2) {
    throw DomainError("double conjugate check needs lambda_max > 0");
  }
  double slope = 0.0;
  if (auto d = phi.derivative(lambda_max)) {
    slope = std::abs(*d);
  } else {
    const double h = lambda_max * 1e-3;
    slope = std::abs(phi(lambda_max) - phi(lambda_max - h)) / h;
  }
  const double window = 2.0 * slope + 1.0;

  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double lambda =
        -lambda_max + 2.0 * lambda_max * static_cast<double>(i) / (points - 1);
    auto objective = [&](double u) {
      return lambda * u - legendre_transform(phi, u);
    };
    const auto r = numeric::scan_maximize(objective, -window, window, 256,
                                          numeric::Spacing::Linear, 1e-13);
    worst = std::max(worst, std::abs(r.value - phi(lambda)));
  }
  return worst;
}

EnvelopeValue overline_phi(const PhiFunction& phi, double lambda, long n_max) {
  if (n_max < 1) {
    throw DomainError("envelope needs n_max >= 1");
  }
  EnvelopeValue out = envelope_scan(phi, lambda, n_max);
  if (n_max == 1) {
    out.continuous_relaxation = out.value;
  } else {
    const auto r = numeric::scan_maximize(
        [&](double t) { return envelope_term(phi, lambda, t); }, 1.0,
        static_cast<double>(n_max), 256, numeric::Spacing::Log, 1e-10);
    out.continuous_relaxation = std::max(r.value, out.value);
  }
  return out;
}

Tabulated tabulate_envelope(const PhiFunction& phi, long n_max,
                            double lambda_max, int points) {
  if (points < 2 || !(lambda_max > 0.0) || n_max < 1) {
    throw DomainError("envelope table needs points >= 2, lambda_max > 0");
  }
  std::vector<double> lambda(static_cast<std::size_t>(points));
  std::vector<double> value(lambda.size());
  for (int k = 0; k < points; ++k) {
    const double l = lambda_max * static_cast<double>(k) / (points - 1);
    lambda[static_cast<std::size_t>(k)] = l;
    value[static_cast<std::size_t>(k)] = envelope_scan(phi, l, n_max).value;
  }
  return Tabulated(std::move(lambda), std::move(value));
}

ConjugateTable::ConjugateTable(const PhiFunction& phi, double u_max,
                               int points) {
  if (!(u_max > 0.0) || points < 2) {
    throw DomainError("conjugate table needs u_max > 0 and >= 2 points");
  }
  u_.resize(static_cast<std::size_t>(points));
  value_.resize(u_.size());
  for (int k = 0; k < points; ++k) {
    const double u = u_max * static_cast<double>(k) / (points - 1);
    u_[static_cast<std::size_t>(k)] = u;
    value_[static_cast<std::size_t>(k)] = legendre_transform(phi, u);
  }
}

double ConjugateTable::operator()(double u) const {
  const double a = std::abs(u);
  if (a > u_.back()) {
    throw DomainError("conjugate table queried outside its u range");
  }
  auto it = std::upper_bound(u_.begin(), u_.end(), a);
  if (it == u_.end()) {
    return value_.back();
  }
  const auto k = static_cast<std::size_t>(it - u_.begin());
  const double w = (a - u_[k - 1]) / (u_[k] - u_[k - 1]);
  return value_[k - 1] + w * (value_[k] - value_[k - 1]);
}

BphiEstimate bphi_norm_estimate(std::span<const double> sample,
                                const PhiFunction& phi,
                                std::span<const double> lambda_grid) {
  if (sample.empty() || lambda_grid.empty()) {
    throw DomainError("B(phi) estimate needs a sample and a lambda grid");
  }
  const auto n = static_cast<double>(sample.size());
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : sample) {
    ss += (s - mean) * (s - mean);
  }
  const double se = sample.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  if (std::abs(mean) > 3.0 * se) {
    std::ostringstream msg;
    msg << "B(phi) estimate needs a centred sample; mean " << mean
        << " exceeds 3 standard errors (" << 3.0 * se << ")";
    throw DomainError(msg.str());
  }

  BphiEstimate out;
  std::vector<std::pair<double, double>> log_mgf;
  const double radius = phi.domain_radius();
  for (double lambda : lambda_grid) {
    if (!(std::abs(lambda) < radius)) {
      throw DomainError("lambda grid must lie inside (-lambda0, lambda0)");
    }
    double peak = -kInf;
    for (double s : sample) {
      peak = std::max(peak, lambda * s);
    }
    double acc = 0.0;
    for (double s : sample) {
      acc += std::exp(lambda * s - peak);
    }
    const double value = peak + std::log(acc / n);
    if (!std::isfinite(value)) {
      out.dropped.push_back(lambda);
      continue;
    }
    log_mgf.emplace_back(lambda, value);
  }

  auto holds = [&](double tau) {
    return std::all_of(log_mgf.begin(), log_mgf.end(), [&](const auto& p) {
      return p.second <= phi(p.first * tau);
    });
  };
  if (holds(0.0)) {
    out.tau = 0.0;
    return out;
  }
  double lo = 1e-6;
  double hi = 1e3;
  if (holds(lo)) {
    out.tau = lo;
    return out;
  }
  if (!holds(hi)) {
    throw NumericalError("B(phi) estimate exceeds the search range [1e-6, 1e3]");
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (holds(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.tau = hi;
  return out;
}

double n_function(const PhiFunction& phi, double u) {
  return std::expm1(legendre_transform(phi, u));
}

}  // namespace lln
