#include "grw/walks.hpp"

#include "grw/errors.hpp"

#include <cmath>
#include <iomanip>

namespace grw {

void validate(const WalkConfig& cfg) {
  if (cfg.n < 1) throw DomainError("walk: n must be >= 1");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw DomainError("walk: horizon must be > 0");
  validate_point(cfg.manifold(), cfg.x0);
}

std::size_t step_count(const WalkConfig& cfg) {
  return static_cast<std::size_t>(std::floor(cfg.n * cfg.horizon + 1e-9));
}

IncrementSource family_increments(const WalkConfig& cfg) {
  return [fam = cfg.family, seed = cfg.seed, replica = cfg.replica](const Point& at, std::size_t index) {
    CounterStream rng(seed, replica, static_cast<std::uint32_t>(index));
    return sample_increment(fam, at, rng);
  };
}

WalkPath run_geodesic_walk(const WalkConfig& cfg) { return run_geodesic_walk(cfg, family_increments(cfg)); }

WalkPath run_geodesic_walk(const WalkConfig& cfg, const IncrementSource& source) {
  validate(cfg);
  const Manifold& m = cfg.manifold();
  const std::size_t steps = step_count(cfg);
  const double scale = 1.0 / cfg.n;
  WalkPath w;
  w.steps.reserve(steps + 1);
  w.increments.reserve(steps);
  w.steps.push_back(cfg.x0);
  for (std::size_t i = 0; i < steps; ++i) {
    TangentVector x = source(w.steps.back(), i);
    w.steps.push_back(exp_map(m, {w.steps.back(), scale * x.components}));
    w.increments.push_back(std::move(x));
  }
  return w;
}

Point walk_endpoint(const WalkConfig& cfg) {
  validate(cfg);
  const Manifold& m = cfg.manifold();
  const std::size_t steps = step_count(cfg);
  const double scale = 1.0 / cfg.n;
  Point at = cfg.x0;
  for (std::size_t i = 0; i < steps; ++i) {
    CounterStream rng(cfg.seed, cfg.replica, static_cast<std::uint32_t>(i));
    TangentVector x = sample_increment(cfg.family, at, rng);
    at = exp_map(m, {at, scale * x.components});
  }
  return at;
}

namespace {

std::size_t index_at(const WalkPath& w, const WalkConfig& cfg, double t) {
  if (!(t >= 0.0) || t > cfg.horizon) throw DomainError("path_at: t outside [0, T]");
  const auto i = static_cast<std::size_t>(std::floor(cfg.n * t + 1e-9));
  return std::min(i, w.steps.size() - 1);
}

}  // namespace

Point path_at(const WalkPath& w, const WalkConfig& cfg, double t) { return w.steps[index_at(w, cfg, t)]; }

Point path_at_interpolated(const WalkPath& w, const WalkConfig& cfg, double t) {
  const std::size_t i = index_at(w, cfg, t);
  if (i + 1 >= w.steps.size()) return w.steps[i];
  const double frac = cfg.n * t - static_cast<double>(i);
  const Manifold& m = cfg.manifold();
  TangentVector v = log_map(m, w.steps[i], w.steps[i + 1]);
  v.components *= frac;
  return exp_map(m, v);
}

void write_walk_csv(std::ostream& os, const WalkPath& w, const WalkConfig& cfg) {
  const auto dims = cfg.manifold().ambient_dim();
  os << "t";
  for (int d = 0; d < dims; ++d) os << ",coord_" << d;
  os << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < w.steps.size(); ++i) {
    os << static_cast<double>(i) / cfg.n;
    for (int d = 0; d < dims; ++d) os << "," << w.steps[i][d];
    os << "\n";
  }
}

}  // namespace grw
