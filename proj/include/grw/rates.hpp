#pragma once

// Hamiltonians H(x, p), their Legendre duals L(x, v), path actions, the
// endpoint (Cramer) rate, the variational semigroup and the characteristic
// flow of a terminal function.

#include "grw/geometry.hpp"
#include "grw/measures.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace grw {

enum class ModelKind { Walk, Brownian };

class RateModel {
 public:
  // H(x, p) = Lambda_x(p) for the walk with steps from `family`.
  static RateModel walk(MeasureFamily family);
  // H(x, p) = |p|^2_g / 2.
  static RateModel brownian(const Manifold& m);

  ModelKind kind() const { return kind_; }
  const Manifold& manifold() const { return manifold_; }
  // Only meaningful for walk models.
  const MeasureFamily& family() const { return *family_; }

  // Radial profile of H in |p|_g.
  RadialProfile profile(double q) const;
  // Declared ceiling for sup_x H(x, d Upsilon(x)): H at |p|_g = 2, which
  // dominates |d Upsilon|_g on every shipped manifold.
  double containment_hamiltonian_bound() const;
  std::string name() const;

 private:
  RateModel(ModelKind kind, Manifold m, std::optional<MeasureFamily> fam)
      : kind_(kind), manifold_(std::move(m)), family_(std::move(fam)) {}

  ModelKind kind_;
  Manifold manifold_;
  std::optional<MeasureFamily> family_;
};

double hamiltonian(const RateModel& rm, const CotangentVector& p);
// grad_p H(x, p): the velocity dual to p.
TangentVector hamiltonian_gradient(const RateModel& rm, const CotangentVector& p);
double lagrangian(const RateModel& rm, const TangentVector& v);
// H(x, d Upsilon(x)) for the containment function centred at x0.
double containment_hamiltonian(const RateModel& rm, const Point& x0, const Point& x);

struct ActionReport {
  double value = 0.0;
  std::vector<double> per_segment;
  std::vector<std::size_t> flags;  // segments touching an out-of-domain velocity
};

// Composite trapezoid rule for the integral of L(c(t), c'(t)).
ActionReport path_action(const RateModel& rm, const Curve& c);

struct CramerResult {
  double rate = 0.0;
  double geodesic_speed = 0.0;
  bool degenerate = false;
};

// min over geodesics x0 -> x in unit time of L(x0, initial velocity).
CramerResult cramer_rate(const RateModel& rm, const Point& x0, const Point& x, int max_geodesics = 4);

struct TerminalFunction {
  std::function<double(const Point&)> value;
  // Optional analytic differential.
  std::function<CotangentVector(const Point&)> gradient;
};

// df(x): the analytic gradient when present, otherwise central differences
// in normal coordinates along an orthonormal frame.
CotangentVector differential(const Manifold& m, const TerminalFunction& f, const Point& x, double h = 1e-5);

struct SemigroupOptions {
  int starts = 8;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SemigroupResult {
  double value = 0.0;
  bool converged = false;
  int best_start = 0;
  Curve path;
};

// sup over piecewise-geodesic paths from x of f(path(t)) - action(path).
SemigroupResult variational_semigroup(const RateModel& rm, const TerminalFunction& f, double t, const Point& x,
                                      int segments, const SemigroupOptions& opts = {});

// Integrates x' = grad_p H(x, df(x)) with RK4 stages pulled back to the
// current tangent space and geodesic updates. Velocities are analytic.
Curve characteristic_flow(const RateModel& rm, const TerminalFunction& f, const Point& x0, double horizon,
                          double dt);

}  // namespace grw
