#pragma once

#include <functional>

namespace lln::numeric {

enum class Spacing { Linear, Log };

/// Result of a coarse-scan-plus-refinement minimization.
struct ScanResult {
  double arg = 0.0;
  double value = 0.0;
  /// The best coarse grid point was an end point of the search window.
  bool boundary_hit = false;
};

/// Minimize `f` over [lo, hi]: evaluate on `points` grid nodes, then run a
/// golden-section search on the bracket around the best node. With
/// Spacing::Log the refinement runs in log-coordinates and lo must be > 0.
/// The refinement stops once the bracket width is below rel_tol * |arg|.
ScanResult scan_minimize(const std::function<double(double)>& f, double lo,
                         double hi, int points, Spacing spacing,
                         double rel_tol = 1e-6);

/// Same as scan_minimize on -f.
ScanResult scan_maximize(const std::function<double(double)>& f, double lo,
                         double hi, int points, Spacing spacing,
                         double rel_tol = 1e-6);

/// Golden-section minimization of a unimodal `f` on [a, b].
ScanResult golden_section(const std::function<double(double)>& f, double a,
                          double b, double tol);

/// Adaptive Gauss-Kronrod quadrature of f on the finite interval [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

}  // namespace lln::numeric
