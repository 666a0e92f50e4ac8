#pragma once

// Riemannian Brownian motion (generator 1/2 Laplace-Beltrami) built from the
// horizontal frame-bundle SDE dU = H_i(U) o dB^i, plus a flat-space SDE
// integrator for the Ito/Stratonovich comparison.

#include "grw/geometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace grw {

// A point and a g(x)-orthonormal frame whose columns are tangent vectors at x.
struct FrameState {
  Point x;
  Mat frame;
};

struct BrownianPath {
  Manifold manifold;
  double dt = 0.0;
  double eps = 0.0;
  std::vector<double> times;
  std::vector<FrameState> states;
  std::vector<Vec> driving_noise;  // db for each step (states.size() - 1 entries)
};

// Frame from the fixed section: reference frame transported from the pole on
// the sphere, normalized coordinate frame on the charts.
FrameState initial_frame_state(const Manifold& m, const Point& x0);

// max |frame^T G frame - I|.
double orthonormality_defect(const Manifold& m, const FrameState& s);

// One step of the horizontal flow with frozen increment: move along the
// geodesic with initial velocity sqrt(eps) * frame * db, transport the frame
// along it, then re-orthonormalize. This rolls the frame without slipping.
FrameState horizontal_step(const Manifold& m, const FrameState& s, const Vec& db, double dt, double eps);

// Gaussian increments N(0, dt I_dim) for step i. Each coarse step sums
// `substeps` fine draws of variance dt / substeps, indexed by the fine step, so
// runs at dt and dt / substeps share one underlying Brownian path.
using NoiseSource = std::function<Vec(std::size_t step)>;
NoiseSource brownian_noise(std::uint64_t seed, std::uint64_t replica, int dim, double dt, int substeps = 1);

std::size_t brownian_step_count(double horizon, double dt);

// Streams states to `observer(step, time, state)` without storing the path.
void simulate_brownian(const Manifold& m, const Point& x0, double eps, double horizon, double dt,
                       const NoiseSource& noise,
                       const std::function<void(std::size_t, double, const FrameState&)>& observer);

BrownianPath run_brownian(const Manifold& m, const Point& x0, double eps, double horizon, double dt,
                          std::uint64_t seed, std::uint64_t replica = 0);
BrownianPath run_brownian(const Manifold& m, const Point& x0, double eps, double horizon, double dt,
                          const NoiseSource& noise);

// Flat curve recovered from the path by integrating frame-inverted geodesic
// increments; equals the cumulative driving noise scaled by sqrt(eps).
std::vector<Vec> anti_development(const BrownianPath& p);

// First grid time with d(x_t, x0) >= delta.
std::optional<double> radial_exit_time(const BrownianPath& p, const Point& x0, double delta);

// Upper bound on P(sup_{t <= tau} d(W_t, x0) >= delta) for Ric >= -L, L >= 1,
// valid for delta > sqrt(2 k L tau).
double exit_bound(int k, double L, double tau, double delta);

void write_brownian_csv(std::ostream& os, const BrownianPath& p);

// --- Euclidean small-noise SDE ---------------------------------------------

using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

enum class SdeScheme { ItoEuler, StratonovichHeun, ItoWithCorrection };

struct SdePath {
  std::vector<double> times;
  std::vector<Vec> states;
};

// (D sigma . sigma)^i = sum_{j,l} d_l sigma^{ij} sigma^{lj}, central differences with step h.
Vec stratonovich_drift_correction(const MatrixField& sigma, const Vec& x, double h = 1e-5);

// dY = b dt + sqrt(eps) sigma(Y) o dW (Stratonovich) or the Ito form, per scheme.
// `noise(step)` returns the Wiener increment for the step (variance dt).
SdePath run_euclidean_sde(const VectorField& b, const MatrixField& sigma, double eps, const Vec& x0, double horizon,
                          double dt, SdeScheme scheme, const NoiseSource& noise);

}  // namespace grw
