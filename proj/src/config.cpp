#include "grw/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace grw {

std::string ConfigIssue::to_string() const {
  std::ostringstream os;
  if (line > 0)
    os << "line " << line << ": ";
  else
    os << "flag: ";
  if (!key.empty()) os << key << ": ";
  os << message;
  return os.str();
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string s = "invalid configuration";
  for (const auto& i : issues) s += "\n  " + i.to_string();
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> list_items(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  if (trim(s).empty()) return {};
  auto items = split(s, ',');
  for (auto& i : items) i = unquote(i);
  return items;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto t = trim(s);
  const char* b = t.data();
  const char* e = b + t.size();
  if (b != e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || t.empty()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_integer(const std::string& s) {
  const auto d = to_double(s);
  if (!d || !std::isfinite(*d) || std::floor(*d) != *d || std::abs(*d) > 9.0e15) return std::nullopt;
  return static_cast<std::int64_t>(*d);
}

std::optional<std::uint64_t> to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

using Setter = std::function<std::string(ExperimentConfig&, const std::string&)>;

Setter real(double ExperimentConfig::*field, double lo, bool strict, const char* rule) {
  return [=](ExperimentConfig& c, const std::string& s) -> std::string {
    const auto v = to_double(s);
    if (!v || !std::isfinite(*v)) return "expected a number, got '" + s + "'";
    if (strict ? !(*v > lo) : !(*v >= lo)) return std::string("must be ") + rule + ", got " + s;
    c.*field = *v;
    return {};
  };
}

Setter integer(int ExperimentConfig::*field, int lo) {
  return [=](ExperimentConfig& c, const std::string& s) -> std::string {
    const auto v = to_integer(s);
    if (!v) return "expected an integer, got '" + s + "'";
    if (*v < lo || *v > 1'000'000'000) return "must be >= " + std::to_string(lo) + ", got " + s;
    c.*field = static_cast<int>(*v);
    return {};
  };
}

Setter text(std::string ExperimentConfig::*field) {
  return [=](ExperimentConfig& c, const std::string& s) -> std::string {
    if (s.empty()) return "must not be empty";
    c.*field = s;
    return {};
  };
}

Setter reals(std::vector<double> ExperimentConfig::*field, bool positive) {
  return [=](ExperimentConfig& c, const std::string& s) -> std::string {
    std::vector<double> out;
    for (const auto& item : list_items(s)) {
      const auto v = to_double(item);
      if (!v || !std::isfinite(*v)) return "expected a list of numbers, got '" + s + "'";
      if (positive && !(*v > 0.0)) return "entries must be > 0, got " + item;
      out.push_back(*v);
    }
    if (out.empty()) return "must not be empty";
    c.*field = out;
    return {};
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"command", text(&ExperimentConfig::command)},
      {"manifold",
       [](ExperimentConfig& c, const std::string& s) -> std::string {
         try {
           parse_manifold(s);
         } catch (const Error& e) {
           return e.what();
         }
         c.manifold = s;
         return {};
       }},
      {"family", text(&ExperimentConfig::family)},
      {"model",
       [](ExperimentConfig& c, const std::string& s) -> std::string {
         if (s != "walk" && s != "brownian") return "unknown model '" + s + "' (supported: walk, brownian)";
         c.model = s;
         return {};
       }},
      {"x0", text(&ExperimentConfig::x0)},
      {"target", text(&ExperimentConfig::target)},
      {"p", reals(&ExperimentConfig::p, false)},
      {"v", reals(&ExperimentConfig::v, false)},
      {"levels",
       [](ExperimentConfig& c, const std::string& s) -> std::string {
         std::vector<int> out;
         for (const auto& item : list_items(s)) {
           const auto v = to_integer(item);
           if (!v || *v < 1 || *v > 1'000'000) return "expected positive integers, got '" + s + "'";
           if (!out.empty() && *v <= out.back()) return "must be strictly increasing";
           out.push_back(static_cast<int>(*v));
         }
         if (out.empty()) return "must not be empty";
         c.levels = out;
         return {};
       }},
      {"replicas",
       [](ExperimentConfig& c, const std::string& s) -> std::string {
         const auto v = to_integer(s);
         if (!v) return "expected an integer, got '" + s + "'";
         if (*v < 1) return "must be >= 1, got " + s;
         c.replicas = *v;
         return {};
       }},
      {"n", integer(&ExperimentConfig::n, 1)},
      {"horizon", real(&ExperimentConfig::horizon, 0.0, true, "> 0")},
      {"t", real(&ExperimentConfig::t, 0.0, false, ">= 0")},
      {"dt", real(&ExperimentConfig::dt, 0.0, true, "> 0")},
      {"eps", real(&ExperimentConfig::eps, 0.0, true, "> 0")},
      {"seed",
       [](ExperimentConfig& c, const std::string& s) -> std::string {
         const auto v = to_u64(s);
         if (!v) return "expected a non-negative 64-bit integer, got '" + s + "'";
         c.seed = *v;
         return {};
       }},
      {"threads", integer(&ExperimentConfig::threads, 1)},
      {"delta", real(&ExperimentConfig::delta, 0.0, false, ">= 0")},
      {"taus",
       [](ExperimentConfig& c, const std::string& s) -> std::string {
         std::vector<double> out;
         for (const auto& item : list_items(s)) {
           const auto v = to_double(item);
           if (!v || !(*v >= 0.0) || !std::isfinite(*v)) return "entries must be numbers >= 0, got '" + s + "'";
           out.push_back(*v);
         }
         if (out.empty()) return "must not be empty";
         c.taus = out;
         return {};
       }},
      {"deltas", reals(&ExperimentConfig::deltas, true)},
      {"segments", integer(&ExperimentConfig::segments, 1)},
      {"starts", integer(&ExperimentConfig::starts, 1)},
      {"terminal", text(&ExperimentConfig::terminal)},
      {"tolerance", real(&ExperimentConfig::tolerance, 0.0, true, "> 0")},
      {"max_geodesics", integer(&ExperimentConfig::max_geodesics, 1)},
      {"prefactor",
       [](ExperimentConfig& c, const std::string& s) -> std::string {
         if (s == "true" || s == "1") {
           c.prefactor = true;
         } else if (s == "false" || s == "0") {
           c.prefactor = false;
         } else {
           return "expected true or false, got '" + s + "'";
         }
         return {};
       }},
      {"out", text(&ExperimentConfig::out)},
  };
  return table;
}

const std::vector<std::string> kCommands = {"walk",      "bm",       "rate",      "action",   "cramer",
                                            "estimate",  "exitbound", "semigroup", "conjugate"};

double parse_number(const std::string& s, const std::string& what) {
  const auto v = to_double(s);
  if (!v || !std::isfinite(*v)) throw DomainError(what + ": expected a number, got '" + s + "'");
  return *v;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues) : Error(join_issues(issues)), issues_(std::move(issues)) {}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RawEntries read_entries(const std::string& text, std::vector<ConfigIssue>& errors) {
  RawEntries entries;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) {
        s.resize(i);
        break;
      }
    }
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[' && s.back() == ']') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      errors.push_back({line, "", "expected key = value, got '" + s + "'"});
      continue;
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = unquote(trim(s.substr(eq + 1)));
    if (key.empty()) {
      errors.push_back({line, "", "missing key before '='"});
      continue;
    }
    if (auto it = entries.find(key); it != entries.end()) {
      errors.push_back({line, key, "duplicate key (first set on line " + std::to_string(it->second.line) + ")"});
      continue;
    }
    entries[key] = {value, line};
  }
  return entries;
}

ConfigParse validate_entries(const RawEntries& entries) {
  ConfigParse out;
  ExperimentConfig cfg;
  const auto& table = setters();
  for (const auto& [key, entry] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) {
      out.errors.push_back({entry.line, key, "unknown key"});
      continue;
    }
    const std::string msg = it->second(cfg, entry.value);
    if (!msg.empty())
      out.errors.push_back({entry.line, key, msg});
    else
      cfg.explicit_keys[key] = entry.value;
  }
  auto line_of = [&](const std::string& key) {
    const auto it = entries.find(key);
    return it == entries.end() ? 0 : it->second.line;
  };
  if (!cfg.command.empty() && std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end())
    out.errors.push_back({line_of("command"), "command", "unknown command '" + cfg.command + "'"});

  // Cross-field checks that need a well-formed manifold.
  std::optional<Manifold> m;
  try {
    m = parse_manifold(cfg.manifold);
  } catch (const Error&) {
  }
  if (m) {
    auto check = [&](const std::string& key, const std::function<void()>& fn) {
      try {
        fn();
      } catch (const Error& e) {
        out.errors.push_back({line_of(key), key, e.what()});
      }
    };
    check("family", [&] { parse_family(cfg.family, *m); });
    check("x0", [&] { parse_point(cfg.x0, *m); });
    if (!cfg.target.empty()) check("target", [&] { parse_point(cfg.target, *m); });
    check("terminal", [&] { parse_terminal(cfg.terminal, *m); });
    auto dims_ok = [&](const std::string& key, const std::vector<double>& v) {
      if (v.size() != 1 && static_cast<int>(v.size()) != m->dim())
        out.errors.push_back({line_of(key), key,
                              "expected 1 or " + std::to_string(m->dim()) + " frame coordinates, got " +
                                  std::to_string(v.size())});
    };
    dims_ok("p", cfg.p);
    dims_ok("v", cfg.v);
  }
  const bool needs_target = cfg.command == "cramer" || cfg.command == "estimate" || cfg.command == "action";
  if (needs_target && cfg.target.empty()) out.errors.push_back({0, "target", "required by '" + cfg.command + "'"});
  if (cfg.command == "estimate" && cfg.replicas < 1000)
    out.errors.push_back({line_of("replicas"), "replicas", "estimate needs at least 1000 replicas"});
  if (cfg.command == "estimate" && cfg.model != "walk")
    out.errors.push_back({line_of("model"), "model", "estimate only supports the walk model"});

  std::sort(out.errors.begin(), out.errors.end(),
            [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
  if (out.errors.empty()) out.config = std::move(cfg);
  return out;
}

ConfigParse parse_config(const std::string& text) {
  std::vector<ConfigIssue> syntax;
  const RawEntries entries = read_entries(text, syntax);
  ConfigParse out = validate_entries(entries);
  if (!syntax.empty()) {
    out.errors.insert(out.errors.end(), syntax.begin(), syntax.end());
    std::stable_sort(out.errors.begin(), out.errors.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    out.config.reset();
  }
  return out;
}

ExperimentConfig parse_config_or_throw(const std::string& text) {
  ConfigParse p = parse_config(text);
  if (!p.ok()) throw ConfigError(p.errors);
  return *p.config;
}

Manifold ExperimentConfig::make_manifold() const { return parse_manifold(manifold); }
MeasureFamily ExperimentConfig::make_family() const { return parse_family(family, make_manifold()); }
RateModel ExperimentConfig::make_model() const {
  if (model == "brownian") return RateModel::brownian(make_manifold());
  return RateModel::walk(make_family());
}
Point ExperimentConfig::make_x0() const { return parse_point(x0, make_manifold()); }
Point ExperimentConfig::make_target() const {
  if (target.empty()) throw DomainError("target: not set");
  return parse_point(target, make_manifold());
}

Manifold parse_manifold(const std::string& desc) {
  const auto parts = split(desc, ':');
  const std::string kind = parts.empty() ? "" : parts[0];
  auto dim_at = [&](std::size_t i, int fallback) {
    if (parts.size() <= i) return fallback;
    const auto v = to_integer(parts[i]);
    if (!v || *v < 1 || *v > 64) throw DomainError("manifold: bad dimension '" + parts[i] + "'");
    return static_cast<int>(*v);
  };
  if (kind == "euclidean") {
    if (parts.size() > 2) throw DomainError("manifold: expected euclidean[:k]");
    return Manifold::euclidean(dim_at(1, 1));
  }
  if (kind == "sphere") {
    if (parts.size() > 3) throw DomainError("manifold: expected sphere:r[:k]");
    const double r = parts.size() > 1 ? parse_number(parts[1], "manifold: sphere radius") : 1.0;
    return Manifold::sphere(r, dim_at(2, 2));
  }
  if (kind == "hyperbolic") {
    if (parts.size() > 1) throw DomainError("manifold: 'hyperbolic' takes no parameters");
    return Manifold::hyperbolic2();
  }
  throw DomainError("unknown manifold kind '" + kind + "' (supported: euclidean[:k], sphere:r[:k], hyperbolic)");
}

MeasureFamily parse_family(const std::string& desc, const Manifold& m) {
  if (desc == "gaussian") return MeasureFamily::gaussian(m);
  if (desc.rfind("ball:", 0) == 0) return MeasureFamily::uniform_ball(m, parse_number(desc.substr(5), "family ball"));
  if (desc.rfind("radial:halfnormal:", 0) == 0)
    return MeasureFamily::radial_norm(m, NormLaw::half_normal(parse_number(desc.substr(18), "family halfnormal")));
  if (desc.rfind("radial:", 0) == 0) {
    std::vector<double> radii, weights;
    for (const auto& atom : split(desc.substr(7), ',')) {
      const auto at = atom.find('@');
      radii.push_back(parse_number(atom.substr(0, at), "family radial radius"));
      weights.push_back(at == std::string::npos ? 1.0 : parse_number(atom.substr(at + 1), "family radial weight"));
    }
    return MeasureFamily::radial_norm(m, NormLaw::discrete(radii, weights));
  }
  throw DomainError("unknown family '" + desc +
                    "' (supported: gaussian, ball:r, radial:r1@w1,..., radial:halfnormal:sigma)");
}

Point parse_point(const std::string& desc, const Manifold& m) {
  if (desc == "origin" || desc == "pole") return origin(m);
  if (desc.rfind("dist:", 0) == 0) {
    const double d = parse_number(desc.substr(5), "point distance");
    const Point o = origin(m);
    const Vec e = orthonormal_frame(m, o).col(0);
    return exp_map(m, {o, d * e});
  }
  std::vector<double> coords;
  for (const auto& item : list_items(desc)) coords.push_back(parse_number(item, "point coordinate"));
  Vec c(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) c[static_cast<Eigen::Index>(i)] = coords[i];
  Point x(std::move(c));
  validate_point(m, x);
  return x;
}

Vec frame_vector(const Manifold& m, const Point& x, const std::vector<double>& coords) {
  const Mat e = orthonormal_frame(m, x);
  if (coords.size() == 1) return coords[0] * e.col(0);
  if (static_cast<int>(coords.size()) != m.dim()) throw DomainError("frame_vector: wrong number of coordinates");
  Vec c(m.dim());
  for (int i = 0; i < m.dim(); ++i) c[i] = coords[static_cast<std::size_t>(i)];
  return e * c;
}

TerminalFunction parse_terminal(const std::string& desc, const Manifold& m) {
  const auto colon = desc.find(':');
  const std::string kind = desc.substr(0, colon);
  const double c = colon == std::string::npos ? 1.0 : parse_number(desc.substr(colon + 1), "terminal coefficient");
  const Point o = origin(m);
  if (kind == "negsq") {
    return {[m, o, c](const Point& y) {
              const double d = distance(m, o, y);
              return -c * d * d;
            },
            [m, o, c](const Point& y) {
              CotangentVector p = lower(m, log_map(m, y, o));
              p.components *= 2.0 * c;
              return p;
            }};
  }
  const int last = m.ambient_dim() - 1;
  if (kind == "height") return {[c, last](const Point& y) { return c * y[last]; }, {}};
  if (kind == "linear") return {[c](const Point& y) { return c * y[0]; }, {}};
  throw DomainError("unknown terminal '" + desc + "' (supported: negsq:c, height:c, linear:c)");
}

}  // namespace grw
