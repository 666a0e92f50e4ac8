#pragma once

// Geodesic random walks S_{i+1} = Exp_{S_i}(X_{i+1} / n), X_{i+1} ~ mu_{S_i}, and
// the piecewise-constant path process Z_n(t) = S_{floor(n t)}.

#include "grw/geometry.hpp"
#include "grw/measures.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

namespace grw {

struct WalkConfig {
  MeasureFamily family;
  Point x0;
  int n = 1;             // scale and steps per unit time
  double horizon = 1.0;  // T
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;

  const Manifold& manifold() const { return family.manifold(); }
};

struct WalkPath {
  std::vector<Point> steps;                // S_0 .. S_{floor(nT)}
  std::vector<TangentVector> increments;  // unscaled draws X_1 .. X_{floor(nT)}
};

// Produces the unscaled increment for step `index` at base point `at`.
using IncrementSource = std::function<TangentVector(const Point& at, std::size_t index)>;

void validate(const WalkConfig& cfg);
std::size_t step_count(const WalkConfig& cfg);

// Increment source used by run_geodesic_walk: stream (seed, replica, index).
IncrementSource family_increments(const WalkConfig& cfg);

WalkPath run_geodesic_walk(const WalkConfig& cfg);
WalkPath run_geodesic_walk(const WalkConfig& cfg, const IncrementSource& source);
// S_{floor(nT)} without storing the path.
Point walk_endpoint(const WalkConfig& cfg);

// Left-continuous step evaluation: steps[floor(n t)].
Point path_at(const WalkPath& w, const WalkConfig& cfg, double t);
// Geodesic interpolation between consecutive steps; for plotting only.
Point path_at_interpolated(const WalkPath& w, const WalkConfig& cfg, double t);

// CSV with header `t,coord_0,...`; one row per step.
void write_walk_csv(std::ostream& os, const WalkPath& w, const WalkConfig& cfg);

}  // namespace grw
