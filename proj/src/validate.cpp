#include "lln/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lln/errors.hpp"

namespace lln {

void validate_scenario(const Scenario& scenario) {
  if (scenario.grid.empty()) {
    throw DomainError("scenario grid is empty");
  }
  if (scenario.replicas < 1) {
    throw DomainError("scenario needs replicas >= 1");
  }
  if (!(scenario.confidence > 0.0 && scenario.confidence < 1.0)) {
    throw DomainError("confidence must lie in (0, 1)");
  }
  if (!scenario.bound) {
    throw DomainError("scenario has no bound");
  }
  for (const auto& p : scenario.grid) {
    validate_spec({scenario.generator, p.n});
    scenario.bound(p.n, p.x);
  }
}

Verdict validate_upper(const Scenario& scenario) {
  validate_scenario(scenario);
  // Replicas are shared across the x values of one horizon n.
  std::map<long, std::vector<std::size_t>> by_n;
  for (std::size_t i = 0; i < scenario.grid.size(); ++i) {
    by_n[scenario.grid[i].n].push_back(i);
  }
  Verdict verdict;
  verdict.points.resize(scenario.grid.size());
  for (const auto& [n, indices] : by_n) {
    std::vector<double> xs;
    for (auto i : indices) {
      xs.push_back(scenario.grid[i].x);
    }
    const auto estimates =
        estimate_Q_grid({scenario.generator, n}, xs, scenario.replicas,
                        scenario.master_seed, scenario.confidence,
                        scenario.threads);
    for (std::size_t j = 0; j < indices.size(); ++j) {
      auto& vp = verdict.points[indices[j]];
      vp.point = scenario.grid[indices[j]];
      vp.bound = scenario.bound(n, vp.point.x);
      vp.estimate = estimates[j];
      vp.margin = vp.bound.value - vp.estimate.ci_high;
      vp.pass = vp.estimate.ci_high <= vp.bound.value;
    }
  }
  verdict.passed = std::all_of(verdict.points.begin(), verdict.points.end(),
                               [](const VerdictPoint& p) { return p.pass; });
  return verdict;
}

ExponentFit fit_exponent(double exponent,
                         std::span<const std::pair<long, double>> estimates) {
  const auto m = static_cast<double>(estimates.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [n, q] : estimates) {
    mx += std::pow(static_cast<double>(n), exponent);
    my += -std::log(q);
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [n, q] : estimates) {
    const double dx = std::pow(static_cast<double>(n), exponent) - mx;
    const double dy = -std::log(q) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  ExponentFit fit;
  fit.exponent = exponent;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double sse = 0.0;
    for (const auto& [n, q] : estimates) {
      const double pred = fit.intercept + fit.slope * std::pow(static_cast<double>(n), exponent);
      const double r = -std::log(q) - pred;
      sse += r * r;
    }
    fit.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  }
  return fit;
}

ScalingFit fit_scaling(double q, std::span<const std::pair<long, double>> estimates) {
  if (!(q > 0.0)) {
    throw DomainError("scaling fit needs q > 0");
  }
  ScalingFit out;
  out.q = q;
  for (const auto& e : estimates) {
    if (e.second > 0.0) {
      out.used.push_back(e);
    } else {
      out.excluded.push_back(e.first);
    }
  }
  std::vector<long> distinct;
  for (const auto& e : out.used) {
    distinct.push_back(e.first);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4) {
    throw DomainError("scaling fit needs >= 4 distinct n with positive estimates");
  }
  out.primary = fit_exponent(q / (q + 2.0), out.used);
  out.primary_best = true;
  for (double a : {q / 2.0, 1.0}) {
    out.alternatives.push_back(fit_exponent(a, out.used));
    if (!(out.primary.r_squared > out.alternatives.back().r_squared)) {
      out.primary_best = false;
    }
  }
  return out;
}

LorentzValue lorentz_norm(const TailFunction& t, double s) {
  if (!(s > 1.0)) {
    throw DomainError("Lorentz norm needs s > 1");
  }
  if (const auto* p = std::get_if<Pareto>(&t.family())) {
    // x^s min(1, x^-r): x^s on (0, 1], x^{s-r} beyond.
    if (s > p->r) {
      return {std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(), true};
    }
    return {1.0, 1.0, false};
  }
  if (const auto* e = std::get_if<EmpiricalTail>(&t.family())) {
    return lorentz_norm(e->sorted_sample(), s);
  }
  double scale = 1.0;
  if (const auto* w = std::get_if<Weibull>(&t.family())) {
    scale = w->K;
  } else if (const auto* l = std::get_if<LogModified>(&t.family())) {
    scale = l->K;
  } else if (const auto* g = std::get_if<SubGaussian>(&t.family())) {
    scale = g->sigma;
  }
  constexpr int kPoints = 10000;
  LorentzValue out;
  int best = 0;
  for (int i = 0; i < kPoints; ++i) {
    const double x = scale * std::pow(10.0, -3.0 + 6.0 * i / (kPoints - 1));
    const double v = std::pow(x, s) * t(x);
    if (v > out.value) {
      out.value = v;
      out.argmax = x;
      best = i;
    }
  }
  out.boundary_hit = best == 0 || best == kPoints - 1;
  return out;
}

LorentzValue lorentz_norm(std::span<const double> sample, double s) {
  if (!(s > 1.0)) {
    throw DomainError("Lorentz norm needs s > 1");
  }
  if (sample.empty()) {
    throw DomainError("Lorentz norm needs a non-empty sample");
  }
  std::vector<double> pos;
  std::vector<double> neg;
  for (double v : sample) {
    if (v > 0.0) {
      pos.push_back(v);
    } else if (v < 0.0) {
      neg.push_back(-v);
    }
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const auto total = static_cast<double>(sample.size());
  // count of entries >= x in a sorted vector
  auto count_ge = [](const std::vector<double>& v, double x) {
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), x));
  };
  LorentzValue out;
  for (const auto* side : {&pos, &neg}) {
    for (std::size_t i = 0; i < side->size(); ++i) {
      const double x = (*side)[i];
      if (i > 0 && (*side)[i - 1] == x) {
        continue;
      }
      const double tail = std::max(count_ge(pos, x), count_ge(neg, x)) / total;
      const double v = std::pow(x, s) * tail;
      if (v > out.value) {
        out.value = v;
        out.argmax = x;
      }
    }
  }
  return out;
}

}  // namespace lln
