#include "lln/cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "lln/bounds.hpp"
#include "lln/cli/report.hpp"
#include "lln/cli/scenario.hpp"
#include "lln/errors.hpp"
#include "lln/phi.hpp"
#include "lln/sim.hpp"
#include "lln/validate.hpp"

namespace lln::cli {

namespace {

using nlohmann::json;

constexpr double kScalingR2Gate = 0.9;
constexpr const char* kOutputDirEnv = "LLN_TAIL_OUTPUT_DIR";

struct Globals {
  std::uint64_t seed = 0;
  std::uint64_t replicas = 0;
  double confidence = 0.0;
  unsigned threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* replicas_opt = nullptr;
  CLI::Option* confidence_opt = nullptr;
};

struct BoundArgs {
  std::string method;
  long n = 1;
  double x = 0.0;
  std::string tail;
  std::string phi;
  std::string norms;
  long n_max = 10000;
  bool beta_q_alt = false;
  bool as_json = false;
  std::map<std::string, double> values;
  std::map<std::string, CLI::Option*> opts;
  CLI::Option* n_opt = nullptr;
  CLI::Option* x_opt = nullptr;
};

struct RunArgs {
  std::string scenario;
  std::string report;
  std::string table;
};

struct ConjugateArgs {
  std::string phi;
  double u_min = 0.0;
  double u_max = 5.0;
  int points = 101;
  long n_max = 10000;
  std::string out;
};

// ---- bound -----------------------------------------------------------------

std::optional<double> value_of(const BoundArgs& a, const std::string& name) {
  if (a.opts.at(name)->count() == 0) {
    return std::nullopt;
  }
  return a.values.at(name);
}

double need(const BoundArgs& a, const std::string& name) {
  const auto v = value_of(a, name);
  if (!v) {
    throw DomainError("bound " + a.method + " needs --" + name);
  }
  return *v;
}

long need_n(const BoundArgs& a) {
  if (a.n_opt->count() == 0) {
    throw DomainError("bound " + a.method + " needs --n");
  }
  return a.n;
}

double need_x(const BoundArgs& a) {
  if (a.x_opt->count() == 0) {
    throw DomainError("bound " + a.method + " needs --x");
  }
  return a.x;
}

// n = 0: length taken from the list.
std::vector<double> parse_norms(const BoundArgs& a, long n) {
  if (a.norms.empty()) {
    throw DomainError("bound " + a.method + " needs --norms");
  }
  std::vector<double> norms;
  std::stringstream in(a.norms);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      norms.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw DomainError("cannot parse norm '" + item + "'");
    }
  }
  if (n > 1 && norms.size() == 1) {
    norms.assign(static_cast<std::size_t>(n), norms.front());
  }
  if (n > 0 && norms.size() != static_cast<std::size_t>(n)) {
    throw DomainError("--norms has " + std::to_string(norms.size()) +
                      " entries but --n is " + std::to_string(n));
  }
  return norms;
}

BoundReport compute_bound(const BoundArgs& a) {
  const std::string& m = a.method;
  if (m == "thm21") {
    if (a.tail.empty()) {
      throw DomainError("bound thm21 needs --tail");
    }
    return thm21_bound(parse_tail(a.tail), need_n(a), need_x(a));
  }
  if (m == "ex21") {
    return ex21_bound(need(a, "Y"), need(a, "K"), need(a, "q"), need_n(a), need_x(a),
                      a.beta_q_alt ? BetaMode::Numeric : BetaMode::Printed);
  }
  if (m == "ex22") {
    return ex22_bound(need(a, "C1"), need(a, "C2"), need(a, "K"), need(a, "q"),
                      need(a, "r"), need_n(a), need_x(a), value_of(a, "C4"));
  }
  if (m == "moment") {
    const auto norms = parse_norms(a, a.n_opt->count() ? a.n : 0);
    return moment_bound(need(a, "p"), static_cast<long>(norms.size()), need_x(a),
                        norms);
  }
  if (m == "moment-opt") {
    const long n = need_n(a);
    const auto norms = parse_norms(a, n);
    auto fixed = [norms](double) { return norms; };
    OptimizedMoment opt = optimized_moment_bound(need(a, "a"), n, need_x(a), fixed);
    opt.report.parameters["argmin_p"] = {opt.argmin_p, Provenance::Derived};
    return opt.report;
  }
  if (m == "thm41") {
    if (a.phi.empty()) {
      throw DomainError("bound thm41 needs --phi");
    }
    return thm41_bound(parse_phi(a.phi), need_n(a), need_x(a), a.n_max);
  }
  if (m == "ex41") {
    return ex41_bound(need(a, "q"), need_n(a), need_x(a), value_of(a, "C1"),
                      value_of(a, "C2"));
  }
  if (m == "inverse-exp") {
    return inverse_tail_bound(need(a, "C1"), need(a, "C2"), need(a, "q"), need_x(a),
                              value_of(a, "C3"), value_of(a, "C4"));
  }
  if (m == "inverse-power") {
    return inverse_power_bound(need(a, "C"), need(a, "s"), need_x(a),
                               value_of(a, "C5"));
  }
  throw DomainError("unknown bound method '" + m + "'");
}

json bound_json(const std::string& method, const BoundReport& r) {
  json params = json::object();
  for (const auto& [name, c] : r.parameters) {
    params[name] = {{"value", c.value}, {"provenance", to_string(c.provenance)}};
  }
  return {{"method", method}, {"n", r.n},           {"x", r.x},
          {"bound", r.value}, {"parameters", params}, {"notes", r.notes}};
}

int cmd_bound(const BoundArgs& a, std::ostream& out) {
  const BoundReport r = compute_bound(a);
  if (a.as_json) {
    out << bound_json(a.method, r).dump(2) << '\n';
    return kExitOk;
  }
  out << "method  " << a.method << '\n'
      << "n       " << r.n << '\n'
      << "x       " << format_double(r.x) << '\n'
      << "bound   " << format_double(r.value) << "\n\n";
  out << std::left << std::setw(22) << "constant" << std::setw(26) << "value"
      << "provenance\n";
  for (const auto& [name, c] : r.parameters) {
    out << std::setw(22) << name << std::setw(26) << format_double(c.value)
        << to_string(c.provenance) << '\n';
  }
  for (const auto& note : r.notes) {
    out << "note: " << note << '\n';
  }
  return kExitOk;
}

// ---- simulate / certify ----------------------------------------------------

std::string default_path(const std::string& scenario_path, const std::string& command,
                         const std::string& extension) {
  std::filesystem::path dir = ".";
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    dir = env;
  }
  const std::string stem = std::filesystem::path(scenario_path).stem().string();
  return (dir / (stem + "." + command + extension)).string();
}

void apply_overrides(ScenarioFile& s, const Globals& g) {
  auto drop_default = [&s](const std::string& key) {
    std::erase(s.defaulted, key);
  };
  if (g.seed_opt->count() > 0) {
    s.seed = g.seed;
    drop_default("seed");
  }
  if (g.replicas_opt->count() > 0) {
    s.replicas = g.replicas;
    drop_default("replicas");
  }
  if (g.confidence_opt->count() > 0) {
    s.confidence = g.confidence;
    drop_default("confidence");
  }
}

std::vector<std::pair<long, std::vector<double>>> group_by_n(
    const std::vector<GridPoint>& grid) {
  std::vector<std::pair<long, std::vector<double>>> groups;
  for (const auto& p : grid) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == p.n; });
    if (it == groups.end()) {
      groups.push_back({p.n, {p.x}});
    } else {
      it->second.push_back(p.x);
    }
  }
  return groups;
}

std::vector<MonteCarloEstimate> simulate_grid(const ScenarioFile& s,
                                              const Generator& g, unsigned threads) {
  std::vector<MonteCarloEstimate> out;
  for (const auto& [n, xs] : group_by_n(s.grid)) {
    const MartingaleSpec spec{g, n};
    auto part = estimate_Q_grid(spec, xs, s.replicas, s.seed, s.confidence, threads);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

json fit_json(const ExponentFit& f) {
  return {{"exponent", f.exponent},
          {"slope", f.slope},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared}};
}

int cmd_run(bool certify, const RunArgs& a, const Globals& g, std::ostream& out) {
  ScenarioFile s = load_scenario(a.scenario);
  apply_overrides(s, g);
  if (!(s.confidence > 0.0 && s.confidence < 1.0)) {
    throw SchemaError("confidence must lie in (0, 1)");
  }
  if (s.replicas < 1) {
    throw SchemaError("replicas must be positive");
  }
  const Generator generator = build_generator(s.generator);
  for (const auto& [n, _] : group_by_n(s.grid)) {
    validate_spec({generator, n});
  }
  if (certify && s.mode == Mode::Upper && s.bound.is_null()) {
    throw SchemaError("certify in upper mode needs a 'bound' block");
  }
  if (s.mode == Mode::Scaling) {
    std::set<double> xs;
    for (const auto& p : s.grid) xs.insert(p.x);
    if (xs.size() != 1) {
      throw SchemaError("scaling mode needs a single x across the grid");
    }
  }

  std::optional<BuiltBound> bound;
  std::vector<BoundReport> bound_values;
  if (!s.bound.is_null()) {
    bound = build_bound(s.bound);
    // Bounds first: domain errors must surface before any simulation.
    for (const auto& p : s.grid) {
      bound_values.push_back(bound->fn(p.n, p.x));
    }
  }
  const std::string method = bound ? bound->method : "none";
  const std::string command = certify ? "certify" : "simulate";
  const std::string stamp = utc_timestamp();

  const auto estimates = simulate_grid(s, generator, g.threads);
  std::vector<ReportRecord> records;
  bool all_pass = true;
  for (const auto& e : estimates) {
    std::optional<BoundReport> b;
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
      if (s.grid[k].n == e.n && s.grid[k].x == e.x && !bound_values.empty()) {
        b = bound_values[k];
      }
    }
    std::optional<bool> pass;
    if (certify && s.mode == Mode::Upper) {
      pass = e.ci_high <= b->value;
      all_pass = all_pass && *pass;
    }
    records.push_back(make_record(e, method, b, pass, stamp));
  }

  json report;
  report["version"] = kReportVersion;
  report["command"] = command;
  report["generated_at"] = stamp;
  report["scenario"] = to_json(s);
  report["generator"] = describe(generator);

  json defaulted_constants = json::object();
  std::set<std::string> notes;
  for (const auto& b : bound_values) {
    for (const auto& [name, c] : b.parameters) {
      if (c.provenance == Provenance::ConfigDefault) {
        defaulted_constants[name] = c.value;
      }
    }
    notes.insert(b.notes.begin(), b.notes.end());
  }
  report["defaulted"] = {{"scenario_keys", s.defaulted},
                         {"constants", defaulted_constants}};
  if (std::holds_alternative<ProductAdversarial>(generator)) {
    notes.insert("eta is sampled symmetrically, so its one-sided tail is "
                 "exp(-x^q)/2; the factor 1/2 is absorbed into the constants");
  }

  json records_json = json::array();
  for (const auto& r : records) {
    records_json.push_back(to_json(r));
  }
  report["records"] = records_json;

  int code = kExitOk;
  if (s.mode == Mode::Scaling) {
    std::vector<std::pair<long, double>> pairs;
    for (const auto& e : estimates) {
      pairs.push_back({e.n, e.point});
    }
    const ScalingFit fit = fit_scaling(s.scaling_q, pairs);
    const bool passed = fit.primary.r_squared >= kScalingR2Gate && fit.primary_best;
    json alts = json::array();
    for (const auto& f : fit.alternatives) {
      alts.push_back(fit_json(f));
    }
    report["scaling"] = {{"q", fit.q},
                         {"primary", fit_json(fit.primary)},
                         {"alternatives", alts},
                         {"excluded_n", fit.excluded},
                         {"primary_best", fit.primary_best},
                         {"r_squared_gate", kScalingR2Gate},
                         {"passed", passed}};
    notes.insert("scaling mode checks the fit quality of the exponent only; the "
                 "multiplicative constants are reported, never asserted");
    out << "scaling fit q=" << format_double(fit.q) << ": R^2 "
        << format_double(fit.primary.r_squared) << " at exponent "
        << format_double(fit.primary.exponent);
    for (const auto& f : fit.alternatives) {
      out << ", " << format_double(f.r_squared) << " at " << format_double(f.exponent);
    }
    out << '\n';
    if (certify && !passed) {
      code = kExitCertifyFailed;
    }
    all_pass = passed;
  }
  if (certify) {
    report["verdict"] = {{"passed", all_pass}};
    if (!all_pass) {
      code = kExitCertifyFailed;
    }
  }
  report["notes"] = std::vector<std::string>(notes.begin(), notes.end());

  const std::string report_path =
      !a.report.empty() ? a.report
      : !s.report_path.empty() ? s.report_path
                               : default_path(a.scenario, command, ".json");
  const std::string table_path =
      !a.table.empty() ? a.table
      : !s.table_path.empty() ? s.table_path
                              : default_path(a.scenario, command, ".csv");
  write_text(report_path, report.dump(2) + "\n");
  std::string csv = csv_header() + "\n";
  for (const auto& r : records) {
    csv += to_csv_row(r) + "\n";
  }
  write_text(table_path, csv);

  for (const auto& r : records) {
    out << "n=" << r.n << " x=" << format_double(r.x)
        << " estimate=" << format_double(r.estimate) << " ci=["
        << format_double(r.ci_low) << ", " << format_double(r.ci_high) << "]";
    if (r.bound) {
      out << " bound=" << format_double(*r.bound);
    }
    if (r.pass) {
      out << (*r.pass ? " pass" : " FAIL");
    }
    out << '\n';
  }
  if (certify) {
    out << (all_pass ? "certified" : "certification failed") << '\n';
  }
  out << "report: " << report_path << "\ntable: " << table_path << '\n';
  return code;
}

// ---- conjugate -------------------------------------------------------------

int cmd_conjugate(const ConjugateArgs& a, std::ostream& out, std::ostream& err) {
  const PhiFunction phi = parse_phi(a.phi);
  const MembershipReport membership = check_phi_membership(phi);
  if (!membership.passed()) {
    err << "error: " << phi.describe() << " fails membership: "
        << membership.summary() << '\n';
    return kExitInputError;
  }
  if (a.points < 2 || !(a.u_max > a.u_min)) {
    throw DomainError("conjugate needs --points >= 2 and --u-max > --u-min");
  }
  std::ostringstream table;
  table << "u,phi_star,phibar_star\n";
  for (int k = 0; k < a.points; ++k) {
    const double u = a.u_min + (a.u_max - a.u_min) * k / (a.points - 1);
    const double star = legendre_transform(phi, u);
    const double bar = envelope_conjugate(phi, std::abs(u), a.n_max).value;
    table << format_double(u) << ',' << format_double(star) << ','
          << format_double(bar) << '\n';
  }
  if (a.out.empty()) {
    out << table.str();
  } else {
    write_text(a.out, table.str());
    out << "table: " << a.out << '\n';
  }
  return kExitOk;
}

void add_run_options(CLI::App* sub, RunArgs& a) {
  sub->add_option("scenario", a.scenario, "Scenario file (or a report to rerun)")
      ->required();
  sub->add_option("--report", a.report, "Report path (JSON)");
  sub->add_option("--table", a.table, "Table path (CSV)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Tail bounds for normed martingale sums, with Monte Carlo "
               "certification"};
  app.name("lln-tail");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Master seed");
  g.replicas_opt = app.add_option("--replicas", g.replicas, "Monte Carlo replicas")
                       ->check(CLI::PositiveNumber);
  g.confidence_opt = app.add_option("--confidence", g.confidence,
                                    "Clopper-Pearson confidence level")
                         ->check(CLI::Range(0.0, 1.0));
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)");

  BoundArgs b;
  auto* bound = app.add_subcommand("bound", "Evaluate a tail bound");
  bound->add_option("method", b.method,
                    "thm21 | ex21 | ex22 | moment | moment-opt | thm41 | ex41 | "
                    "inverse-exp | inverse-power")
      ->required();
  b.n_opt = bound->add_option("--n", b.n, "Number of summands");
  b.x_opt = bound->add_option("--x", b.x, "Threshold");
  bound->add_option("--tail", b.tail, "subgaussian:s | pareto:r | weibull:Y,K,q | "
                                      "logmod:C1,C2,K,q,r");
  bound->add_option("--phi", b.phi, "quadratic:c | phi-q:q | power:p");
  bound->add_option("--norms", b.norms, "Comma-separated per-index norms");
  bound->add_option("--n-max", b.n_max, "Envelope search limit");
  bound->add_flag("--beta-q-alt", b.beta_q_alt, "Numeric beta(q) for every q");
  bound->add_flag("--json", b.as_json, "Print the report as JSON");
  for (const char* name : {"Y", "K", "q", "r", "p", "a", "s", "C", "C1", "C2", "C3",
                           "C4", "C5"}) {
    b.values[name] = 0.0;
    b.opts[name] = bound->add_option(std::string("--") + name, b.values[name]);
  }

  RunArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Estimate Q_n(x) over a scenario grid");
  add_run_options(simulate, sim_args);

  RunArgs cert_args;
  auto* certify = app.add_subcommand("certify", "Check bounds against Monte Carlo");
  add_run_options(certify, cert_args);

  ConjugateArgs c;
  auto* conjugate = app.add_subcommand("conjugate", "Tabulate phi* and phi_bar*");
  conjugate->add_option("--phi", c.phi, "quadratic:c | phi-q:q | power:p")->required();
  conjugate->add_option("--u-min", c.u_min, "First u");
  conjugate->add_option("--u-max", c.u_max, "Last u");
  conjugate->add_option("--points", c.points, "Number of u values");
  conjugate->add_option("--n-max", c.n_max, "Envelope search limit");
  conjugate->add_option("--out", c.out, "Table path (CSV); stdout if omitted");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*bound) return cmd_bound(b, out);
    if (*simulate) return cmd_run(false, sim_args, g, out);
    if (*certify) return cmd_run(true, cert_args, g, out);
    if (*conjugate) return cmd_conjugate(c, out, err);
  } catch (const InfiniteMomentError& e) {
    err << "error: infinite moment: " << e.what() << '\n';
    return kExitInputError;
  } catch (const SchemaError& e) {
    err << "error: invalid scenario: " << e.what() << '\n';
    return kExitInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const NumericalError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid scenario: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace lln::cli
