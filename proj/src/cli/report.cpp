#include "lln/cli/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lln/errors.hpp"

namespace lln::cli {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ReportRecord make_record(const MonteCarloEstimate& e, const std::string& method,
                         const std::optional<BoundReport>& bound,
                         std::optional<bool> pass, const std::string& timestamp) {
  ReportRecord r;
  r.n = e.n;
  r.x = e.x;
  r.method = method;
  if (bound) {
    r.parameters = bound->parameters;
    r.bound = bound->value;
  }
  r.estimate = e.point;
  r.ci_low = e.ci_low;
  r.ci_high = e.ci_high;
  r.successes = e.successes;
  r.replicas = e.replicas;
  r.pass = pass;
  r.seed = e.seed;
  r.confidence = e.confidence;
  r.timestamp = timestamp;
  return r;
}

json to_json(const ReportRecord& r) {
  json params = json::object();
  for (const auto& [name, c] : r.parameters) {
    params[name] = {{"value", c.value}, {"provenance", to_string(c.provenance)}};
  }
  return {{"n", r.n},
          {"x", r.x},
          {"method", r.method},
          {"parameters", params},
          {"bound", r.bound ? json(*r.bound) : json(nullptr)},
          {"estimate", r.estimate},
          {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},
          {"successes", r.successes},
          {"replicas", r.replicas},
          {"pass", r.pass ? json(*r.pass) : json(nullptr)},
          {"seed", r.seed},
          {"confidence", r.confidence},
          {"timestamp", r.timestamp}};
}

ReportRecord record_from_json(const json& j) {
  ReportRecord r;
  r.n = j.at("n").get<long>();
  r.x = j.at("x").get<double>();
  r.method = j.at("method").get<std::string>();
  for (const auto& [name, c] : j.at("parameters").items()) {
    const std::string prov = c.at("provenance").get<std::string>();
    Provenance p = Provenance::Paper;
    for (Provenance cand : {Provenance::Paper, Provenance::ConfigDefault,
                            Provenance::User, Provenance::Derived}) {
      if (to_string(cand) == prov) {
        p = cand;
      }
    }
    r.parameters[name] = {c.at("value").get<double>(), p};
  }
  if (!j.at("bound").is_null()) {
    r.bound = j.at("bound").get<double>();
  }
  r.estimate = j.at("estimate").get<double>();
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  r.successes = j.at("successes").get<std::uint64_t>();
  r.replicas = j.at("replicas").get<std::uint64_t>();
  if (!j.at("pass").is_null()) {
    r.pass = j.at("pass").get<bool>();
  }
  r.seed = j.at("seed").get<std::uint64_t>();
  r.confidence = j.at("confidence").get<double>();
  r.timestamp = j.at("timestamp").get<std::string>();
  return r;
}

std::string csv_header() {
  return "n,x,method,bound,estimate,ci_low,ci_high,successes,replicas,pass,seed,"
         "confidence,timestamp,parameters";
}

std::string to_csv_row(const ReportRecord& r) {
  std::ostringstream out;
  out << r.n << ',' << format_double(r.x) << ',' << r.method << ','
      << (r.bound ? format_double(*r.bound) : "") << ','
      << format_double(r.estimate) << ',' << format_double(r.ci_low) << ','
      << format_double(r.ci_high) << ',' << r.successes << ',' << r.replicas << ','
      << (r.pass ? (*r.pass ? "true" : "false") : "") << ',' << r.seed << ','
      << format_double(r.confidence) << ',' << r.timestamp << ',';
  bool first = true;
  for (const auto& [name, c] : r.parameters) {
    if (!first) out << ';';
    out << name << '=' << format_double(c.value);
    first = false;
  }
  return out.str();
}

json strip_timestamps(const json& report) {
  if (report.is_object()) {
    json out = json::object();
    for (const auto& [key, value] : report.items()) {
      if (key == "timestamp" || key == "generated_at") {
        continue;
      }
      out[key] = strip_timestamps(value);
    }
    return out;
  }
  if (report.is_array()) {
    json out = json::array();
    for (const auto& v : report) {
      out.push_back(strip_timestamps(v));
    }
    return out;
  }
  return report;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(p);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << text;
}

}  // namespace lln::cli
