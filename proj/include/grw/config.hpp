#pragma once

// Experiment configuration: a key = value text format (TOML-like: `#`
// comments, optional [section] headers, quoted strings, [a, b] lists) plus the
// descriptor strings used for manifolds, measure families, points and terminal
// functions. Command-line flags use the same keys and take precedence.

#include "grw/errors.hpp"
#include "grw/geometry.hpp"
#include "grw/measures.hpp"
#include "grw/rates.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace grw {

struct ConfigIssue {
  int line = 0;  // 0 for values that came from the command line
  std::string key;
  std::string message;
  std::string to_string() const;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct RawEntry {
  std::string value;
  int line = 0;
};
using RawEntries = std::map<std::string, RawEntry>;

struct ExperimentConfig {
  std::string command;
  std::string manifold = "euclidean:1";
  std::string family = "gaussian";
  std::string model = "walk";
  std::string x0 = "origin";
  std::string target;
  std::vector<double> p{0.0};
  std::vector<double> v{0.0};
  std::vector<int> levels{8, 16, 32, 64};
  std::int64_t replicas = 10000;
  int n = 100;
  double horizon = 1.0;
  double t = 1.0;
  double dt = 1e-3;
  double eps = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;
  double delta = 0.0;
  std::vector<double> taus{0.005, 0.01};
  std::vector<double> deltas{0.4, 0.5, 0.7};
  int segments = 16;
  int starts = 8;
  std::string terminal = "negsq:1";
  double tolerance = 0.15;
  int max_geodesics = 4;
  bool prefactor = true;
  std::string out;

  // Keys that were set explicitly, with their raw values.
  std::map<std::string, std::string> explicit_keys;

  Manifold make_manifold() const;
  MeasureFamily make_family() const;
  RateModel make_model() const;
  Point make_x0() const;
  Point make_target() const;
};

struct ConfigParse {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigIssue> errors;
  bool ok() const { return errors.empty(); }
};

// Every key accepted in files and as --flags.
const std::vector<std::string>& config_keys();

// Splits text into entries; syntax problems and duplicate keys are reported
// in `errors` with line numbers.
RawEntries read_entries(const std::string& text, std::vector<ConfigIssue>& errors);

// Checks every entry and collects all problems instead of stopping at the first.
ConfigParse validate_entries(const RawEntries& entries);

ConfigParse parse_config(const std::string& text);
// parse_config, throwing ConfigError when anything is wrong.
ExperimentConfig parse_config_or_throw(const std::string& text);

// "euclidean[:k]", "sphere:r[:k]", "hyperbolic".
Manifold parse_manifold(const std::string& desc);
// "gaussian", "ball:r", "radial:r1@w1,r2@w2,...", "radial:halfnormal:sigma".
MeasureFamily parse_family(const std::string& desc, const Manifold& m);
// "origin" / "pole", "dist:d" (distance d from the origin along the first
// frame direction), or comma-separated ambient coordinates.
Point parse_point(const std::string& desc, const Manifold& m);
// Frame coordinates at x; a single number c means c along the first direction.
Vec frame_vector(const Manifold& m, const Point& x, const std::vector<double>& coords);
// "negsq:c" -> -c d(origin, y)^2, "height:c" -> c * last coordinate,
// "linear:c" -> c * first coordinate.
TerminalFunction parse_terminal(const std::string& desc, const Manifold& m);

}  // namespace grw
