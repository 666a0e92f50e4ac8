#pragma once

// JSON experiment reports and the per-level CSV table.

#include "grw/estimator.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace grw {

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentReport {
  nlohmann::json config = nlohmann::json::object();
  std::vector<RateEstimate> estimates;
  double theory = 0.0;
  double tolerance = 0.0;  // relative tolerance used for `pass`
  bool pass = false;
  double wall_time = 0.0;  // seconds
};

// |fitted - theory| <= tolerance * |theory|, or <= tolerance when theory is 0.
bool within_tolerance(double fitted, double theory, double tolerance);

nlohmann::json to_json(const RateEstimate& e);
RateEstimate rate_estimate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentReport& r);
// Throws SchemaVersionError when the version field is missing or different.
ExperimentReport report_from_json(const nlohmann::json& j);

// Numbers are written in shortest round-trip form, so a reload is bit-identical.
void persist_report(const ExperimentReport& r, const std::string& path);
// Throws IoError for unreadable or malformed files.
ExperimentReport load_report(const std::string& path);

// Header `n,hits,replicas,log_prob`; log_prob is -(1/n) log p_n, empty when no hits.
void write_estimate_csv(std::ostream& os, const RateEstimate& e);

}  // namespace grw
