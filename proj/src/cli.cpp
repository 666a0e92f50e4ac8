#include "grw/cli.hpp"

#include "grw/brownian.hpp"
#include "grw/config.hpp"
#include "grw/errors.hpp"
#include "grw/estimator.hpp"
#include "grw/rates.hpp"
#include "grw/report.hpp"
#include "grw/walks.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace grw {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Command {
  const char* name;
  const char* help;
};

const Command kCommandTable[] = {
    {"walk", "simulate one geodesic random walk and write its path as CSV"},
    {"bm", "simulate Brownian motion by horizontal frame-bundle steps and write CSV"},
    {"rate", "evaluate H(x0, p) and L(x0, v) for the chosen model"},
    {"action", "action of the unit-time geodesic from x0 to target"},
    {"cramer", "endpoint rate: minimal L over geodesics from x0 to target"},
    {"estimate", "Monte Carlo endpoint rate against the theoretical value"},
    {"exitbound", "Brownian exit probabilities against the exit-time bound"},
    {"semigroup", "variational semigroup V(t) f at x0 by multi-start path optimization"},
    {"conjugate", "Legendre transform of the family's log-MGF at v"},
};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

json vec_json(const Vec& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

std::string vec_text(const Vec& v) {
  std::ostringstream os;
  os << std::setprecision(8) << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

json config_json(const ExperimentConfig& c) {
  return {{"command", c.command},   {"manifold", c.manifold}, {"family", c.family},   {"model", c.model},
          {"x0", c.x0},             {"target", c.target},     {"p", c.p},             {"v", c.v},
          {"levels", c.levels},     {"replicas", c.replicas}, {"n", c.n},             {"horizon", c.horizon},
          {"t", c.t},               {"dt", c.dt},             {"eps", c.eps},         {"seed", c.seed},
          {"threads", c.threads},   {"delta", c.delta},       {"taus", c.taus},       {"deltas", c.deltas},
          {"segments", c.segments}, {"starts", c.starts},     {"terminal", c.terminal},
          {"tolerance", c.tolerance}, {"max_geodesics", c.max_geodesics}, {"prefactor", c.prefactor}};
}

fs::path output_path(const ExperimentConfig& c, const std::string& fallback) {
  fs::path p = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) p = fs::path(dir) / p;
  }
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create output directory " + p.parent_path().string() + ": " + ec.message());
  }
  return p;
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot open output file " + p.string());
  return os;
}

void write_json(const fs::path& p, const json& j) {
  auto os = open_output(p);
  os << j.dump(2) << "\n";
}

int cmd_walk(const ExperimentConfig& c, std::ostream& out) {
  const WalkConfig w{c.make_family(), c.make_x0(), c.n, c.horizon, c.seed, 0};
  const WalkPath path = run_geodesic_walk(w);
  const fs::path file = output_path(c, "walk.csv");
  auto os = open_output(file);
  write_walk_csv(os, path, w);
  out << "walk: " << path.increments.size() << " steps, endpoint " << vec_text(path.steps.back().coords) << " -> "
      << file.string() << "\n";
  return kExitOk;
}

int cmd_bm(const ExperimentConfig& c, std::ostream& out) {
  const Manifold m = c.make_manifold();
  const BrownianPath path = run_brownian(m, c.make_x0(), c.eps, c.t, c.dt, c.seed);
  const fs::path file = output_path(c, "bm.csv");
  auto os = open_output(file);
  write_brownian_csv(os, path);
  out << "bm: " << path.states.size() - 1 << " steps, endpoint " << vec_text(path.states.back().x.coords) << " -> "
      << file.string() << "\n";
  return kExitOk;
}

int cmd_rate(const ExperimentConfig& c, std::ostream& out) {
  const RateModel rm = c.make_model();
  const Manifold& m = rm.manifold();
  const Point x0 = c.make_x0();
  const CotangentVector p = lower(m, {x0, frame_vector(m, x0, c.p)});
  const TangentVector v{x0, frame_vector(m, x0, c.v)};
  const double h = hamiltonian(rm, p);
  const double l = lagrangian(rm, v);
  write_json(output_path(c, "rate.json"), {{"model", rm.name()},
                                           {"x0", vec_json(x0.coords)},
                                           {"p", vec_json(p.components)},
                                           {"hamiltonian", h},
                                           {"v", vec_json(v.components)},
                                           {"lagrangian", l}});
  out << std::setprecision(8) << "rate: H(x0, p) " << h << ", L(x0, v) " << l << "\n";
  return kExitOk;
}

int cmd_action(const ExperimentConfig& c, std::ostream& out) {
  const RateModel rm = c.make_model();
  const Manifold& m = rm.manifold();
  const Point x0 = c.make_x0(), x = c.make_target();
  const Curve curve = geodesic_curve(m, log_map(m, x0, x), c.segments, 1.0);
  const ActionReport a = path_action(rm, curve);
  write_json(output_path(c, "action.json"), {{"model", rm.name()},
                                             {"x0", vec_json(x0.coords)},
                                             {"x", vec_json(x.coords)},
                                             {"segments", c.segments},
                                             {"action", a.value},
                                             {"flagged_segments", a.flags}});
  out << std::setprecision(8) << "action " << a.value << "\n";
  return kExitOk;
}

int cmd_cramer(const ExperimentConfig& c, std::ostream& out) {
  const RateModel rm = c.make_model();
  const Point x0 = c.make_x0(), x = c.make_target();
  const CramerResult r = cramer_rate(rm, x0, x, c.max_geodesics);
  write_json(output_path(c, "cramer.json"), {{"model", rm.name()},
                                             {"x0", vec_json(x0.coords)},
                                             {"x", vec_json(x.coords)},
                                             {"rate", r.rate},
                                             {"geodesic_speed", r.geodesic_speed},
                                             {"degenerate_flag", r.degenerate}});
  out << std::setprecision(8) << "rate " << r.rate << (r.degenerate ? " (degenerate)" : "") << "\n";
  return kExitOk;
}

int cmd_estimate(const ExperimentConfig& c, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  EndpointRateConfig e{c.make_family(), c.make_x0(), c.make_target()};
  e.delta = c.delta;
  e.levels = c.levels;
  e.replicas = c.replicas;
  e.seed = c.seed;
  e.threads = c.threads;
  e.prefactor_correction = c.prefactor;
  ExperimentReport r;
  r.config = config_json(c);
  r.estimates.push_back(estimate_endpoint_rate(e));
  r.theory = cramer_rate(RateModel::walk(e.family), e.x0, e.target, c.max_geodesics).rate;
  r.tolerance = c.tolerance;
  r.pass = within_tolerance(r.estimates[0].fitted_rate, r.theory, r.tolerance);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path file = output_path(c, "estimate.json");
  persist_report(r, file.string());
  fs::path table = file;
  table.replace_extension(".csv");
  auto os = open_output(table);
  write_estimate_csv(os, r.estimates[0]);
  out << std::setprecision(6) << "estimate: fitted rate " << r.estimates[0].fitted_rate << " +/- "
      << r.estimates[0].standard_error << ", theory " << r.theory << ", pass=" << (r.pass ? "true" : "false")
      << " -> " << file.string() << "\n";
  return kExitOk;
}

int cmd_exitbound(const ExperimentConfig& c, std::ostream& out) {
  const Manifold m = c.make_manifold();
  const Point x0 = c.make_x0();
  std::vector<ExitGridPoint> grid;
  for (double tau : c.taus)
    for (double delta : c.deltas) grid.push_back({tau, delta});
  const ExitBoundReport r = verify_exit_bound(m, x0, grid, c.eps, c.replicas, c.dt, c.seed, c.threads);
  json points = json::array();
  for (const auto& p : r.points)
    points.push_back({{"tau", p.tau},
                      {"delta", p.delta},
                      {"exceedances", p.exceedances},
                      {"replicas", p.replicas},
                      {"empirical", p.empirical},
                      {"upper_confidence", p.upper_confidence},
                      {"bound", p.bound},
                      {"holds", p.holds}});
  write_json(output_path(c, "exitbound.json"), {{"config", config_json(c)}, {"points", points}, {"pass", r.pass}});
  std::size_t held = 0;
  for (const auto& p : r.points) held += p.holds;
  out << "exitbound: " << held << "/" << r.points.size() << " grid points hold, pass=" << (r.pass ? "true" : "false")
      << "\n";
  return kExitOk;
}

int cmd_semigroup(const ExperimentConfig& c, std::ostream& out) {
  const RateModel rm = c.make_model();
  const Point x0 = c.make_x0();
  SemigroupOptions opts;
  opts.starts = c.starts;
  opts.seed = c.seed;
  opts.threads = c.threads;
  const TerminalFunction f = parse_terminal(c.terminal, rm.manifold());
  const SemigroupResult r = variational_semigroup(rm, f, c.t, x0, c.segments, opts);
  json path = json::array();
  for (const auto& p : r.path.points) path.push_back(vec_json(p.coords));
  write_json(output_path(c, "semigroup.json"), {{"model", rm.name()},
                                                {"terminal", c.terminal},
                                                {"t", c.t},
                                                {"x0", vec_json(x0.coords)},
                                                {"value", r.value},
                                                {"converged", r.converged},
                                                {"best_start", r.best_start},
                                                {"path", path}});
  out << std::setprecision(8) << "semigroup " << r.value << (r.converged ? "" : " (not converged)") << "\n";
  return kExitOk;
}

int cmd_conjugate(const ExperimentConfig& c, std::ostream& out) {
  const MeasureFamily fam = c.make_family();
  const Manifold& m = fam.manifold();
  const Point x0 = c.make_x0();
  const TangentVector v{x0, frame_vector(m, x0, c.v)};
  const ConjugateResult r = legendre(fam, v);
  write_json(output_path(c, "conjugate.json"), {{"family", fam.name()},
                                                {"x0", vec_json(x0.coords)},
                                                {"v", vec_json(v.components)},
                                                {"value", r.value},
                                                {"argmax_p", vec_json(r.argmax_p.components)},
                                                {"attained", r.attained},
                                                {"out_of_domain", r.out_of_domain},
                                                {"iterations", r.iterations},
                                                {"residual", r.residual}});
  out << std::setprecision(8) << "conjugate " << r.value << (r.out_of_domain ? " (outside the mean range)" : "")
      << "\n";
  return kExitOk;
}

int dispatch(const ExperimentConfig& c, std::ostream& out) {
  if (c.command == "walk") return cmd_walk(c, out);
  if (c.command == "bm") return cmd_bm(c, out);
  if (c.command == "rate") return cmd_rate(c, out);
  if (c.command == "action") return cmd_action(c, out);
  if (c.command == "cramer") return cmd_cramer(c, out);
  if (c.command == "estimate") return cmd_estimate(c, out);
  if (c.command == "exitbound") return cmd_exitbound(c, out);
  if (c.command == "semigroup") return cmd_semigroup(c, out);
  return cmd_conjugate(c, out);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geodesic random walks, Brownian motion and large-deviation rates on manifolds", "grw"};
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::string config_file;
  std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> options;
  for (const auto& cmd : kCommandTable) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_file, "key = value configuration file");
    for (const auto& key : config_keys()) {
      if (key == "command") continue;
      options[cmd.name].emplace_back(key, sub->add_option(flag_name(key), values[key]));
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::vector<ConfigIssue> issues;
  RawEntries entries;
  if (!config_file.empty()) {
    try {
      entries = read_entries(read_file(config_file), issues);
    } catch (const IoError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    }
  }
  for (const auto& [key, opt] : options[command])
    if (opt->count() > 0) entries[key] = {values[key], 0};
  entries["command"] = {command, entries.count("command") ? entries["command"].line : 0};

  ConfigParse parsed = validate_entries(entries);
  issues.insert(issues.end(), parsed.errors.begin(), parsed.errors.end());
  if (!issues.empty()) {
    err << "error: invalid configuration\n";
    for (const auto& i : issues) err << "  " << i.to_string() << "\n";
    return kExitValidation;
  }

  try {
    return dispatch(*parsed.config, out);
  } catch (const InvalidPoint& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace grw
