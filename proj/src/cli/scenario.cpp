#include "lln/cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lln/bounds.hpp"
#include "lln/errors.hpp"

namespace lln::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) {
    throw SchemaError(where + " must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw SchemaError("unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) {
    throw SchemaError(where + " needs '" + key + "'");
  }
  if (!obj.at(key).is_number()) {
    throw SchemaError(where + "." + key + " must be a number");
  }
  return obj.at(key).get<double>();
}

std::optional<double> optional_number(const json& obj, const std::string& key,
                                      const std::string& where) {
  if (!obj.contains(key)) {
    return std::nullopt;
  }
  return number(obj, key, where);
}

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw DomainError("cannot parse number '" + item + "'");
    }
    if (used != item.size()) {
      throw DomainError("cannot parse number '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::pair<std::string, std::vector<double>> split_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw DomainError("expected '<family>:<parameters>', got '" + text + "'");
  }
  return {text.substr(0, colon), split_numbers(text.substr(colon + 1))};
}

DiscreteDist build_atoms(const json& atoms, const std::string& where) {
  if (!atoms.is_array() || atoms.empty()) {
    throw SchemaError(where + " must be a non-empty array of [value, probability]");
  }
  std::vector<double> values;
  std::vector<double> probs;
  for (const auto& a : atoms) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      throw SchemaError(where + " entries must be [value, probability]");
    }
    values.push_back(a[0].get<double>());
    probs.push_back(a[1].get<double>());
  }
  return DiscreteDist(std::move(values), std::move(probs));
}

DiscreteDist build_zeta(const json& z) {
  reject_unknown(z, {"gauss_hermite", "atoms"}, "generator.zeta");
  if (z.contains("gauss_hermite") == z.contains("atoms")) {
    throw SchemaError("generator.zeta needs exactly one of gauss_hermite, atoms");
  }
  if (z.contains("gauss_hermite")) {
    if (!z["gauss_hermite"].is_number_integer()) {
      throw SchemaError("generator.zeta.gauss_hermite must be an integer");
    }
    return gauss_hermite_distribution(z["gauss_hermite"].get<int>());
  }
  return build_atoms(z["atoms"], "generator.zeta.atoms");
}

BaseGenerator build_base(const json& g, const std::string& where) {
  if (!g.is_object() || !g.contains("type") || !g["type"].is_string()) {
    throw SchemaError(where + " needs a string 'type'");
  }
  const std::string type = g["type"];
  if (type == "rademacher") {
    reject_unknown(g, {"type"}, where);
    return Rademacher{};
  }
  if (type == "uniform") {
    reject_unknown(g, {"type", "half_width"}, where);
    return UniformSym{number(g, "half_width", where)};
  }
  if (type == "weibull_sym") {
    reject_unknown(g, {"type", "q"}, where);
    return WeibullSym{number(g, "q", where)};
  }
  if (type == "discrete") {
    reject_unknown(g, {"type", "atoms"}, where);
    if (!g.contains("atoms")) {
      throw SchemaError(where + " needs 'atoms'");
    }
    return IidDiscrete{build_atoms(g["atoms"], where + ".atoms")};
  }
  throw SchemaError(where + ": unknown generator type '" + type + "'");
}

SignRule parse_rule(const std::string& s) {
  if (s == "none") return SignRule::None;
  if (s == "follow_sign") return SignRule::FollowSign;
  if (s == "oppose_sign") return SignRule::OpposeSign;
  throw SchemaError("unknown sign rule '" + s + "'");
}

std::vector<GridPoint> parse_grid(const json& grid) {
  std::vector<GridPoint> out;
  auto read_n = [](const json& v) {
    if (!v.is_number_integer() || v.get<long>() < 1) {
      throw SchemaError("grid n values must be positive integers");
    }
    return v.get<long>();
  };
  auto read_x = [](const json& v) {
    if (!v.is_number()) {
      throw SchemaError("grid x values must be numbers");
    }
    return v.get<double>();
  };
  if (grid.is_array()) {
    for (const auto& p : grid) {
      reject_unknown(p, {"n", "x"}, "grid point");
      if (!p.contains("n") || !p.contains("x")) {
        throw SchemaError("grid points need n and x");
      }
      out.push_back({read_n(p["n"]), read_x(p["x"])});
    }
  } else {
    reject_unknown(grid, {"n", "x"}, "grid");
    if (!grid.contains("n") || !grid.contains("x") || !grid["n"].is_array() ||
        !grid["x"].is_array()) {
      throw SchemaError("grid needs arrays 'n' and 'x'");
    }
    for (const auto& n : grid["n"]) {
      for (const auto& x : grid["x"]) {
        out.push_back({read_n(n), read_x(x)});
      }
    }
  }
  if (out.empty()) {
    throw SchemaError("grid is empty");
  }
  return out;
}

}  // namespace

TailFunction parse_tail(const std::string& text) {
  const auto [family, p] = split_spec(text);
  auto need = [&](std::size_t k) {
    if (p.size() != k) {
      throw DomainError("tail '" + family + "' takes " + std::to_string(k) +
                        " parameter(s)");
    }
  };
  if (family == "subgaussian") {
    need(1);
    return TailFunction::sub_gaussian(p[0]);
  }
  if (family == "pareto") {
    need(1);
    return TailFunction::pareto(p[0]);
  }
  if (family == "weibull") {
    need(3);
    return TailFunction::weibull(p[0], p[1], p[2]);
  }
  if (family == "logmod") {
    need(5);
    return TailFunction::log_modified(p[0], p[1], p[2], p[3], p[4]);
  }
  throw DomainError("unknown tail family '" + family + "'");
}

PhiFunction parse_phi(const std::string& text) {
  const auto [family, p] = split_spec(text);
  if (p.size() != 1) {
    throw DomainError("phi '" + family + "' takes one parameter");
  }
  if (family == "quadratic") {
    return PhiFunction::quadratic(p[0]);
  }
  if (family == "phi-q") {
    return PhiFunction::phi_q(p[0]);
  }
  if (family == "power") {
    if (!(p[0] > 0.0)) {
      throw DomainError("power phi needs an exponent > 0");
    }
    constexpr int kNodes = 5001;
    constexpr double kRadius = 50.0;
    std::vector<double> lambda(kNodes);
    std::vector<double> value(kNodes);
    for (int k = 0; k < kNodes; ++k) {
      lambda[static_cast<std::size_t>(k)] = kRadius * k / (kNodes - 1);
      value[static_cast<std::size_t>(k)] =
          std::pow(lambda[static_cast<std::size_t>(k)], p[0]);
    }
    return PhiFunction(Tabulated(std::move(lambda), std::move(value)));
  }
  throw DomainError("unknown phi family '" + family + "'");
}

Generator build_generator(const json& g) {
  if (!g.is_object() || !g.contains("type") || !g["type"].is_string()) {
    throw SchemaError("generator needs a string 'type'");
  }
  const std::string type = g["type"];
  if (type == "product_adversarial") {
    reject_unknown(g, {"type", "q", "zeta"}, "generator");
    if (!g.contains("zeta")) {
      throw SchemaError("product_adversarial needs 'zeta'");
    }
    return ProductAdversarial{number(g, "q", "generator"), build_zeta(g["zeta"])};
  }
  if (type == "conditional_sub_phi") {
    reject_unknown(g, {"type", "base", "rule"}, "generator");
    if (!g.contains("base")) {
      throw SchemaError("conditional_sub_phi needs 'base'");
    }
    SignRule rule = SignRule::None;
    if (g.contains("rule")) {
      if (!g["rule"].is_string()) {
        throw SchemaError("generator.rule must be a string");
      }
      rule = parse_rule(g["rule"]);
    }
    return ConditionalSubPhi{build_base(g["base"], "generator.base"), rule};
  }
  return std::visit([](auto&& b) -> Generator { return b; },
                    build_base(g, "generator"));
}

BuiltBound build_bound(const json& b) {
  if (!b.is_object() || !b.contains("method") || !b["method"].is_string()) {
    throw SchemaError("bound needs a string 'method'");
  }
  const std::string method = b["method"];
  const std::string where = "bound";
  if (method == "thm21") {
    reject_unknown(b, {"method", "tail"}, where);
    if (!b.contains("tail") || !b["tail"].is_string()) {
      throw SchemaError("thm21 needs a string 'tail'");
    }
    const TailFunction t = parse_tail(b["tail"]);
    return {method, [t](long n, double x) { return thm21_bound(t, n, x); }};
  }
  if (method == "ex21") {
    reject_unknown(b, {"method", "Y", "K", "q", "beta_q_alt"}, where);
    const double Y = number(b, "Y", where);
    const double K = number(b, "K", where);
    const double q = number(b, "q", where);
    const BetaMode mode = b.value("beta_q_alt", false) ? BetaMode::Numeric
                                                       : BetaMode::Printed;
    return {method, [=](long n, double x) { return ex21_bound(Y, K, q, n, x, mode); }};
  }
  if (method == "ex22") {
    reject_unknown(b, {"method", "C1", "C2", "K", "q", "r", "C4"}, where);
    const double C1 = number(b, "C1", where);
    const double C2 = number(b, "C2", where);
    const double K = number(b, "K", where);
    const double q = number(b, "q", where);
    const double r = number(b, "r", where);
    const auto C4 = optional_number(b, "C4", where);
    return {method, [=](long n, double x) {
              return ex22_bound(C1, C2, K, q, r, n, x, C4);
            }};
  }
  if (method == "moment") {
    reject_unknown(b, {"method", "p", "norm"}, where);
    const double p = number(b, "p", where);
    const double norm = number(b, "norm", where);
    return {method, [=](long n, double x) {
              return moment_bound(p, n, x,
                                  std::vector<double>(static_cast<std::size_t>(n), norm));
            }};
  }
  if (method == "thm41") {
    reject_unknown(b, {"method", "phi", "n_max"}, where);
    if (!b.contains("phi") || !b["phi"].is_string()) {
      throw SchemaError("thm41 needs a string 'phi'");
    }
    const PhiFunction phi = parse_phi(b["phi"]);
    long n_max = 10000;
    if (b.contains("n_max")) {
      if (!b["n_max"].is_number_integer()) {
        throw SchemaError("bound.n_max must be an integer");
      }
      n_max = b["n_max"].get<long>();
    }
    return {method, [=](long n, double x) { return thm41_bound(phi, n, x, n_max); }};
  }
  if (method == "ex41") {
    reject_unknown(b, {"method", "q", "C1", "C2"}, where);
    const double q = number(b, "q", where);
    const auto C1 = optional_number(b, "C1", where);
    const auto C2 = optional_number(b, "C2", where);
    return {method, [=](long n, double x) { return ex41_bound(q, n, x, C1, C2); }};
  }
  if (method == "fixed") {
    reject_unknown(b, {"method", "value"}, where);
    const double v = number(b, "value", where);
    return {method, [v](long n, double x) {
              BoundReport r;
              r.n = n;
              r.x = x;
              r.value = v;
              r.parameters["value"] = {v, Provenance::User};
              r.notes.push_back("fixed value; harness sanity check only");
              return r;
            }};
  }
  throw SchemaError("unknown bound method '" + method + "'");
}

ScenarioFile parse_scenario(const json& input) {
  const json& doc =
      input.is_object() && input.contains("records") && input.contains("scenario")
          ? input["scenario"]
          : input;
  reject_unknown(doc,
                 {"version", "generator", "bound", "grid", "replicas", "seed",
                  "confidence", "mode", "scaling", "output"},
                 "scenario");
  ScenarioFile s;
  if (!doc.contains("version") || !doc["version"].is_number_integer()) {
    throw SchemaError("scenario needs an integer 'version'");
  }
  s.version = doc["version"].get<int>();
  if (s.version != kScenarioVersion) {
    throw SchemaError("unsupported scenario version " + std::to_string(s.version));
  }
  if (!doc.contains("generator")) {
    throw SchemaError("scenario needs 'generator'");
  }
  s.generator = doc["generator"];
  build_generator(s.generator);
  if (doc.contains("bound")) {
    s.bound = doc["bound"];
    build_bound(s.bound);
  }
  if (!doc.contains("grid")) {
    throw SchemaError("scenario needs 'grid'");
  }
  s.grid = parse_grid(doc["grid"]);

  if (doc.contains("replicas")) {
    if (!doc["replicas"].is_number_integer() || doc["replicas"].get<long long>() < 1) {
      throw SchemaError("replicas must be a positive integer");
    }
    s.replicas = doc["replicas"].get<std::uint64_t>();
  } else {
    s.defaulted.push_back("replicas");
  }
  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_unsigned() &&
        !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      throw SchemaError("seed must be a non-negative integer");
    }
    s.seed = doc["seed"].get<std::uint64_t>();
  } else {
    s.defaulted.push_back("seed");
  }
  if (doc.contains("confidence")) {
    s.confidence = number(doc, "confidence", "scenario");
    if (!(s.confidence > 0.0 && s.confidence < 1.0)) {
      throw SchemaError("confidence must lie in (0, 1)");
    }
  } else {
    s.defaulted.push_back("confidence");
  }
  if (doc.contains("mode")) {
    const std::string mode = doc["mode"].is_string() ? doc["mode"].get<std::string>() : "";
    if (mode == "upper") {
      s.mode = Mode::Upper;
    } else if (mode == "scaling") {
      s.mode = Mode::Scaling;
    } else {
      throw SchemaError("mode must be 'upper' or 'scaling'");
    }
  } else {
    s.defaulted.push_back("mode");
  }
  if (doc.contains("scaling")) {
    reject_unknown(doc["scaling"], {"q"}, "scaling");
    s.scaling_q = number(doc["scaling"], "q", "scaling");
  }
  if (s.mode == Mode::Scaling && !(s.scaling_q > 0.0)) {
    throw SchemaError("scaling mode needs scaling.q > 0");
  }
  if (doc.contains("output")) {
    reject_unknown(doc["output"], {"report", "table"}, "output");
    if (doc["output"].contains("report")) {
      s.report_path = doc["output"]["report"].get<std::string>();
    }
    if (doc["output"].contains("table")) {
      s.table_path = doc["output"]["table"].get<std::string>();
    }
  }
  return s;
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SchemaError("cannot open scenario file '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

json to_json(const ScenarioFile& s) {
  json doc;
  doc["version"] = s.version;
  doc["generator"] = s.generator;
  if (!s.bound.is_null()) {
    doc["bound"] = s.bound;
  }
  json grid = json::array();
  for (const auto& p : s.grid) {
    grid.push_back({{"n", p.n}, {"x", p.x}});
  }
  doc["grid"] = grid;
  doc["replicas"] = s.replicas;
  doc["seed"] = s.seed;
  doc["confidence"] = s.confidence;
  doc["mode"] = s.mode == Mode::Upper ? "upper" : "scaling";
  if (s.mode == Mode::Scaling) {
    doc["scaling"] = {{"q", s.scaling_q}};
  }
  if (!s.report_path.empty() || !s.table_path.empty()) {
    json out = json::object();
    if (!s.report_path.empty()) out["report"] = s.report_path;
    if (!s.table_path.empty()) out["table"] = s.table_path;
    doc["output"] = out;
  }
  return doc;
}

}  // namespace lln::cli
