#include "lln/tails.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lln/errors.hpp"
#include "lln/numeric.hpp"

namespace lln {

namespace {

constexpr int kScanPoints = 256;
constexpr double kScanDecades = 3.0;  // each side of the centre
constexpr double kRefineTol = 1e-6;
constexpr double kQuadTol = 1e-12;
constexpr double kTruncation = 1e-14;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clamp01(double v) {
  if (!(v > 0.0)) {
    return 0.0;
  }
  return std::min(1.0, v);
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw DomainError(what);
  }
}

// Natural length scale of a family, used to seed quadrature truncation.
double scale_of(const TailFunction::Family& f) {
  return std::visit(
      Overloaded{[](const Weibull& w) { return w.K; },
                 [](const LogModified& l) { return l.K; },
                 [](const Pareto&) { return 1.0; },
                 [](const SubGaussian& s) { return s.sigma; },
                 [](const EmpiricalTail& e) { return std::max(1.0, e.max_abs()); }},
      f);
}

double empirical_second_moment(const EmpiricalTail& e, double v) {
  std::vector<double> breaks;
  breaks.reserve(e.size());
  for (double s : e.sorted_sample()) {
    if (s != 0.0) {
      breaks.push_back(std::abs(s));
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // T is constant on each (c_j, c_{j+1}] and equals T(c_{j+1}) there.
  double integral = 0.0;
  double prev = v;
  for (double c : breaks) {
    if (c <= v) {
      continue;
    }
    integral += e(c) * (c * c - prev * prev) / 2.0;
    prev = c;
  }
  return v * v * e(v) + 2.0 * integral;
}

double pareto_second_moment(const Pareto& p, double v) {
  if (p.r <= 2.0) {
    std::ostringstream msg;
    msg << "tail pareto:" << p.r
        << " has no finite second moment (needs r > 2)";
    throw InfiniteMomentError(msg.str());
  }
  const double r = p.r;
  if (v <= 1.0) {
    return r / (r - 2.0);
  }
  return std::pow(v, 2.0 - r) * r / (r - 2.0);
}

}  // namespace

EmpiricalTail::EmpiricalTail(std::span<const double> sample) {
  if (sample.empty()) {
    throw DomainError("empirical tail needs a non-empty sample");
  }
  auto sorted = std::make_shared<std::vector<double>>(sample.begin(),
                                                      sample.end());
  for (double s : *sorted) {
    if (!std::isfinite(s)) {
      throw DomainError("empirical tail sample contains a non-finite value");
    }
  }
  std::sort(sorted->begin(), sorted->end());
  sorted_ = std::move(sorted);
}

double EmpiricalTail::operator()(double x) const {
  if (x < 0.0 || std::isnan(x)) {
    throw DomainError("tail function argument must be >= 0");
  }
  if (x == 0.0) {
    return 1.0;
  }
  const auto& s = *sorted_;
  const auto n = static_cast<double>(s.size());
  const auto upper = static_cast<double>(
      s.end() - std::lower_bound(s.begin(), s.end(), x));
  const auto lower = static_cast<double>(
      std::upper_bound(s.begin(), s.end(), -x) - s.begin());
  return std::max(upper, lower) / n;
}

double EmpiricalTail::max_abs() const {
  return std::max(std::abs(sorted_->front()), std::abs(sorted_->back()));
}

TailFunction::TailFunction(Family family) : family_(std::move(family)) {
  std::visit(
      Overloaded{
          [](const Weibull& w) {
            require(w.Y >= 1.0 && w.K > 0.0 && w.q > 0.0,
                    "weibull tail needs Y >= 1, K > 0, q > 0");
          },
          [](const LogModified& l) {
            require(l.C1 > 0.0 && l.C2 > 0.0 && l.K > 0.0 && l.q > 0.0 &&
                        std::isfinite(l.r),
                    "log-modified tail needs C1, C2, K, q > 0 and finite r");
          },
          [](const Pareto& p) {
            require(p.r > 0.0 && std::isfinite(p.r), "pareto tail needs r > 0");
          },
          [](const SubGaussian& s) {
            require(s.sigma > 0.0 && std::isfinite(s.sigma),
                    "sub-gaussian tail needs sigma > 0");
          },
          [](const EmpiricalTail&) {}},
      family_);
}

double TailFunction::operator()(double x) const {
  if (x < 0.0 || std::isnan(x)) {
    throw DomainError("tail function argument must be >= 0");
  }
  if (x == 0.0) {
    return 1.0;
  }
  return std::visit(
      Overloaded{
          [x](const Weibull& w) {
            return clamp01(w.Y * std::exp(-std::pow(x / w.K, w.q)));
          },
          [x](const LogModified& l) {
            const double f = l.r <= 0.0 ? 1.0 : std::exp(l.q);
            const double z = x / l.K;
            const double expo =
                l.C2 * std::pow(z, l.q) * std::pow(std::log(f + z), l.r);
            return clamp01(l.C1 * std::exp(-expo));
          },
          [x](const Pareto& p) { return clamp01(std::pow(x, -p.r)); },
          [x](const SubGaussian& s) {
            return clamp01(std::exp(-x * x / (2.0 * s.sigma * s.sigma)));
          },
          [x](const EmpiricalTail& e) { return e(x); }},
      family_);
}

std::string TailFunction::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{[&](const Weibull& w) {
                          out << "weibull:" << w.Y << "," << w.K << "," << w.q;
                        },
                        [&](const LogModified& l) {
                          out << "logmod:" << l.C1 << "," << l.C2 << "," << l.K
                              << "," << l.q << "," << l.r;
                        },
                        [&](const Pareto& p) { out << "pareto:" << p.r; },
                        [&](const SubGaussian& s) {
                          out << "subgaussian:" << s.sigma;
                        },
                        [&](const EmpiricalTail& e) {
                          out << "empirical:n=" << e.size();
                        }},
             family_);
  return out.str();
}

double eval(const TailFunction& t, double x) { return t(x); }

EmpiricalTail empirical_tail(std::span<const double> sample) {
  return EmpiricalTail(sample);
}

InfimumResult product_compose(const TailFunction& t, const TailFunction& g,
                              double x) {
  if (!(x > 0.0)) {
    throw DomainError("product composition needs x > 0");
  }
  const double centre = std::sqrt(x);
  const double span = std::pow(10.0, kScanDecades);
  auto objective = [&](double y) { return t(y) + g(x / y); };
  const auto r = numeric::scan_minimize(objective, centre / span, centre * span,
                                        kScanPoints, numeric::Spacing::Log,
                                        kRefineTol);
  return {std::min(1.0, 4.0 * r.value), r.arg, r.boundary_hit};
}

double tail_second_moment(const TailFunction& t, double v) {
  if (v < 0.0 || std::isnan(v)) {
    throw DomainError("tail second moment needs v >= 0");
  }
  const auto& family = t.family();
  if (const auto* p = std::get_if<Pareto>(&family)) {
    return pareto_second_moment(*p, v);
  }
  if (const auto* e = std::get_if<EmpiricalTail>(&family)) {
    return empirical_second_moment(*e, v);
  }

  // Layered form: v^2 T(v) + 2 int_v^U x T(x) dx, U where x^2 T(x) < 1e-14.
  const double scale = scale_of(family);
  double upper = std::max(v, scale);
  for (int i = 0; i < 2000 && upper * upper * t(upper) >= kTruncation; ++i) {
    upper *= 1.5;
  }
  if (upper * upper * t(upper) >= kTruncation) {
    throw InfiniteMomentError("tail " + t.describe() +
                              " does not decay fast enough for a second moment");
  }
  const double mid = std::max(v, scale);
  double integral = numeric::integrate(
      [&](double x) { return x * t(x); }, v, mid, kQuadTol);
  // Log-coordinates above the natural scale: x T(x) dx = x^2 T(x) dlog x.
  integral += numeric::integrate(
      [&](double s) {
        const double x = std::exp(s);
        return x * x * t(x);
      },
      std::log(mid), std::log(upper), kQuadTol);
  return v * v * t(v) + 2.0 * integral;
}

InfimumResult w_operator(const TailFunction& t, double x) {
  if (!(x > 0.0)) {
    throw DomainError("W operator needs x > 0");
  }
  // Fails fast with InfiniteMomentError before the scan.
  tail_second_moment(t, x);
  const double span = std::pow(10.0, kScanDecades);
  auto objective = [&](double v) {
    return std::exp(-x * x / (8.0 * v * v)) + tail_second_moment(t, v);
  };
  const auto r = numeric::scan_minimize(objective, x / span, x * span,
                                        kScanPoints, numeric::Spacing::Log,
                                        kRefineTol);
  return {std::min(1.0, r.value), r.arg, r.boundary_hit};
}

}  // namespace lln
