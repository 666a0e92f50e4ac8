#include "grw/report.hpp"

#include "grw/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace grw {

namespace {

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Vec json_vec(const nlohmann::json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

// NaN has no JSON spelling; it goes out as null.
double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

bool within_tolerance(double fitted, double theory, double tolerance) {
  if (!std::isfinite(fitted)) return false;
  const double scale = theory == 0.0 ? 1.0 : std::abs(theory);
  return std::abs(fitted - theory) <= tolerance * scale;
}

nlohmann::json to_json(const RateEstimate& e) {
  nlohmann::json j;
  j["levels"] = e.levels;
  j["hits"] = e.hits;
  nlohmann::json lp = nlohmann::json::array();
  for (double v : e.log_probs) lp.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
  j["log_probs"] = lp;
  j["dropped"] = e.dropped;
  j["fitted_rate"] = e.fitted_rate;
  j["stderr"] = e.standard_error;
  j["replicas"] = e.replicas;
  j["target"] = {{"point", vec_json(e.target.coords)}, {"delta", e.delta}};
  j["prefactor"] = e.prefactor;
  return j;
}

RateEstimate rate_estimate_from_json(const nlohmann::json& j) {
  RateEstimate e;
  e.levels = j.at("levels").get<std::vector<int>>();
  e.hits = j.at("hits").get<std::vector<std::int64_t>>();
  for (const auto& v : j.at("log_probs")) e.log_probs.push_back(number_or_nan(v));
  e.dropped = j.at("dropped").get<std::vector<bool>>();
  e.fitted_rate = j.at("fitted_rate").get<double>();
  e.standard_error = j.at("stderr").get<double>();
  e.replicas = j.at("replicas").get<std::int64_t>();
  e.target = Point(json_vec(j.at("target").at("point")));
  e.delta = j.at("target").at("delta").get<double>();
  e.prefactor = j.at("prefactor").get<double>();
  return e;
}

nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["version"] = kReportSchemaVersion;
  j["config"] = r.config;
  j["estimates"] = nlohmann::json::array();
  for (const auto& e : r.estimates) j["estimates"].push_back(to_json(e));
  j["theory"] = r.theory;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["wall_time"] = r.wall_time;
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer())
    throw SchemaVersionError("report: missing schema version");
  const int version = j["version"].get<int>();
  if (version != kReportSchemaVersion)
    throw SchemaVersionError("report: schema version " + std::to_string(version) + ", expected " +
                             std::to_string(kReportSchemaVersion));
  ExperimentReport r;
  r.config = j.at("config");
  for (const auto& e : j.at("estimates")) r.estimates.push_back(rate_estimate_from_json(e));
  r.theory = j.at("theory").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.wall_time = j.at("wall_time").get<double>();
  return r;
}

void persist_report(const ExperimentReport& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("persist_report: cannot open " + path);
  os << to_json(r).dump(2) << "\n";
  if (!os) throw IoError("persist_report: write failed for " + path);
}

ExperimentReport load_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_report: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& ex) {
    throw IoError("load_report: " + path + ": " + ex.what());
  }
  try {
    return report_from_json(j);
  } catch (const nlohmann::json::exception& ex) {
    throw IoError("load_report: " + path + ": " + ex.what());
  }
}

void write_estimate_csv(std::ostream& os, const RateEstimate& e) {
  os << "n,hits,replicas,log_prob\n" << std::setprecision(17);
  for (std::size_t i = 0; i < e.levels.size(); ++i) {
    os << e.levels[i] << "," << e.hits[i] << "," << e.replicas << ",";
    if (std::isfinite(e.log_probs[i])) os << e.log_probs[i];
    os << "\n";
  }
}

}  // namespace grw
