#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lln/bounds.hpp"
#include "lln/sim.hpp"

namespace lln::cli {

inline constexpr int kReportVersion = 1;

/// One flat row per (n, x).
struct ReportRecord {
  long n = 1;
  double x = 0.0;
  std::string method;
  std::map<std::string, Constant> parameters;
  std::optional<double> bound;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t successes = 0;
  std::uint64_t replicas = 0;
  std::optional<bool> pass;
  std::uint64_t seed = 0;
  double confidence = 0.99;
  std::string timestamp;
};

ReportRecord make_record(const MonteCarloEstimate& e, const std::string& method,
                         const std::optional<BoundReport>& bound,
                         std::optional<bool> pass, const std::string& timestamp);

nlohmann::json to_json(const ReportRecord& r);
ReportRecord record_from_json(const nlohmann::json& j);

/// %.17g
std::string format_double(double v);

/// UTC, ISO 8601.
std::string utc_timestamp();

std::string csv_header();
std::string to_csv_row(const ReportRecord& r);

/// Copy of a report with every timestamp field removed, for comparing the
/// numeric content of two runs.
nlohmann::json strip_timestamps(const nlohmann::json& report);

void write_text(const std::string& path, const std::string& text);

}  // namespace lln::cli
