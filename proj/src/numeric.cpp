#include "lln/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "lln/errors.hpp"

namespace lln::numeric {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

}  // namespace

ScanResult golden_section(const std::function<double(double)>& f, double a,
                          double b, double tol) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? ScanResult{c, fc, false} : ScanResult{d, fd, false};
}

ScanResult scan_minimize(const std::function<double(double)>& f, double lo,
                         double hi, int points, Spacing spacing,
                         double rel_tol) {
  if (!(hi > lo) || points < 3) {
    throw DomainError("scan_minimize: need hi > lo and at least 3 points");
  }
  const bool log_space = spacing == Spacing::Log;
  if (log_space && lo <= 0.0) {
    throw DomainError("scan_minimize: log spacing needs lo > 0");
  }
  const double a = log_space ? std::log(lo) : lo;
  const double b = log_space ? std::log(hi) : hi;
  auto to_x = [&](double t) { return log_space ? std::exp(t) : t; };

  std::vector<double> grid(static_cast<std::size_t>(points));
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double t = a + (b - a) * static_cast<double>(i) / (points - 1);
    grid[static_cast<std::size_t>(i)] = t;
    const double v = f(to_x(t));
    if (v < best_value) {
      best_value = v;
      best = static_cast<std::size_t>(i);
    }
  }
  if (!std::isfinite(best_value)) {
    return {to_x(grid[best]), best_value, false};
  }

  const std::size_t left = best == 0 ? 0 : best - 1;
  const std::size_t right = best + 1 == grid.size() ? best : best + 1;
  const bool boundary = best == 0 || best + 1 == grid.size();

  auto g = [&](double t) { return f(to_x(t)); };
  const double scale = std::max(std::abs(to_x(grid[best])),
                                std::numeric_limits<double>::min());
  // Tolerance in the refinement coordinate; in log-space a relative
  // tolerance on x is an absolute one on t.
  const double tol = log_space ? rel_tol : rel_tol * scale;
  ScanResult refined = golden_section(g, grid[left], grid[right], tol);
  ScanResult out{to_x(refined.arg), refined.value, boundary};
  if (best_value < out.value) {
    out.arg = to_x(grid[best]);
    out.value = best_value;
  }
  return out;
}

ScanResult scan_maximize(const std::function<double(double)>& f, double lo,
                         double hi, int points, Spacing spacing,
                         double rel_tol) {
  auto neg = [&](double x) { return -f(x); };
  ScanResult r = scan_minimize(neg, lo, hi, points, spacing, rel_tol);
  r.value = -r.value;
  return r;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (b <= a) {
    return 0.0;
  }
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &error);
}

}  // namespace lln::numeric
