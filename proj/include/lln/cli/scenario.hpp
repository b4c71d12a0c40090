#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lln/phi.hpp"
#include "lln/sim.hpp"
#include "lln/tails.hpp"
#include "lln/validate.hpp"

namespace lln::cli {

/// Malformed scenario document (unknown key, wrong type, bad version, ...).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kScenarioVersion = 1;

enum class Mode { Upper, Scaling };

struct ScenarioFile {
  int version = kScenarioVersion;
  nlohmann::json generator;
  /// Empty for simulate-only scenarios.
  nlohmann::json bound;
  std::vector<GridPoint> grid;
  std::uint64_t replicas = 100000;
  std::uint64_t seed = 0;
  double confidence = 0.99;
  Mode mode = Mode::Upper;
  double scaling_q = 0.0;
  std::string report_path;
  std::string table_path;
  /// Keys that were filled from defaults rather than the document.
  std::vector<std::string> defaulted;
};

/// Parses and validates a scenario document. A report document is
/// accepted too; its embedded "scenario" block is used.
ScenarioFile parse_scenario(const nlohmann::json& doc);
ScenarioFile load_scenario(const std::string& path);

/// Normalized document; parse_scenario(to_json(s)) reproduces s.
nlohmann::json to_json(const ScenarioFile& s);

Generator build_generator(const nlohmann::json& g);

/// "subgaussian:1", "pareto:1.5", "weibull:Y,K,q", "logmod:C1,C2,K,q,r".
TailFunction parse_tail(const std::string& text);

/// "quadratic:c", "phi-q:q", "power:p" (|lambda|^p tabulated on [0, 50]).
PhiFunction parse_phi(const std::string& text);

struct BuiltBound {
  std::string method;
  BoundFunction fn;
};

/// Bound block -> callable. Methods: thm21, ex21, ex22, moment, thm41,
/// ex41, fixed (constant value; harness sanity checks only).
BuiltBound build_bound(const nlohmann::json& b);

}  // namespace lln::cli
