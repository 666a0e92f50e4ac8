#pragma once

// Concrete Riemannian manifolds: flat space, round spheres and the hyperbolic
// plane. Every primitive has a closed form; the Christoffel/RK4 integrators in
// geometry_ode are kept as an independent cross-check.
//
// Representations
//   Euclidean(k)  Cartesian coordinates, tangent components in the standard basis.
//   Sphere(r, k)  points are vectors in R^{k+1} with |x| = r; tangent vectors are
//                 ambient vectors orthogonal to x (induced metric = dot product).
//   Hyperbolic2   upper half-plane chart (a, b), b > 0, metric b^-2 (da^2 + db^2);
//                 tangent components are coordinate components.
//
// Cotangent vectors use the same component layout, and the pairing <p, v> is
// the plain dot product of components. Lowering multiplies by the
// representation metric; raising divides by it.

#include <Eigen/Dense>

#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace grw {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ManifoldKind { Euclidean, Sphere, Hyperbolic2 };

inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

// Angular distance below which two sphere points count as antipodal.
inline constexpr double kCutLocusTolerance = 1e-9;

struct Point {
  Vec coords;

  Point() = default;
  explicit Point(Vec c) : coords(std::move(c)) {}
  Point(std::initializer_list<double> c) : coords(static_cast<Eigen::Index>(c.size())) {
    Eigen::Index i = 0;
    for (double v : c) coords[i++] = v;
  }
  Eigen::Index size() const { return coords.size(); }
  double operator[](Eigen::Index i) const { return coords[i]; }
};

struct TangentVector {
  Point base;
  Vec components;
};

struct CotangentVector {
  Point base;
  Vec components;
};

class Manifold {
 public:
  static Manifold euclidean(int dim);
  static Manifold sphere(double radius, int dim = 2);
  static Manifold hyperbolic2();

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // Length of Point::coords.
  int ambient_dim() const { return kind_ == ManifoldKind::Sphere ? dim_ + 1 : dim_; }
  double radius() const { return radius_; }
  // Constant L with Ric >= -L.
  double ricci_lower_bound() const;
  double injectivity_radius(const Point& x) const;
  std::string name() const;

  bool operator==(const Manifold&) const = default;

 private:
  Manifold(ManifoldKind kind, int dim, double radius) : kind_(kind), dim_(dim), radius_(radius) {}

  ManifoldKind kind_;
  int dim_;
  double radius_;
};

// A sampled curve. `velocities` is either empty or aligned with `points`.
struct Curve {
  std::vector<double> times;
  std::vector<Point> points;
  std::vector<TangentVector> velocities;
};

// Throws InvalidPoint when x does not lie on m.
void validate_point(const Manifold& m, const Point& x);
// Pulls a slightly drifted point back onto the manifold (sphere only).
Point normalize_point(const Manifold& m, const Point& x);
// Removes the normal component of an ambient vector (sphere only).
Vec project_tangent(const Manifold& m, const Point& x, const Vec& v);

// A fixed smooth-where-possible section of frames: coordinate frame on the
// charts, a reference frame transported from the north pole on the sphere.
Mat natural_frame(const Manifold& m, const Point& x);
// Same section, normalized to be g(x)-orthonormal.
Mat orthonormal_frame(const Manifold& m, const Point& x);

// Coefficient matrix of g(x) in natural_frame(m, x).
Mat metric_at(const Manifold& m, const Point& x);

double inner(const Manifold& m, const Point& x, const Vec& v, const Vec& w);
double norm(const Manifold& m, const TangentVector& v);
double norm(const Manifold& m, const CotangentVector& p);
double pairing(const CotangentVector& p, const TangentVector& v);
CotangentVector lower(const Manifold& m, const TangentVector& v);
TangentVector raise(const Manifold& m, const CotangentVector& p);

Point exp_map(const Manifold& m, const TangentVector& v);
// Throws CutLocusError for antipodal points on the sphere.
TangentVector log_map(const Manifold& m, const Point& x, const Point& y);
double distance(const Manifold& m, const Point& x, const Point& y);

// Transports w (based at v.base) along t -> exp(t v), t in [0, 1].
TangentVector transport_along_geodesic(const Manifold& m, const TangentVector& v, const Vec& w);

enum class TransportMethod { ClosedForm, Ode };

// Transport along a discretized curve, segment by segment along minimal
// geodesics between consecutive samples.
TangentVector parallel_transport(const Manifold& m, const Curve& c, const TangentVector& v,
                                 TransportMethod method = TransportMethod::ClosedForm);
// Cotangent transport via tau p (V) = p (tau^-1 V).
CotangentVector parallel_transport(const Manifold& m, const Curve& c, const CotangentVector& p,
                                   TransportMethod method = TransportMethod::ClosedForm);

// Differentials of (x, y) -> d^2(x, y) in each slot.
struct SqDistanceGradient {
  CotangentVector at_x;
  CotangentVector at_y;
};
SqDistanceGradient grad_sq_distance(const Manifold& m, const Point& x, const Point& y);

struct GeodesicSolutions {
  std::vector<TangentVector> velocities;  // sorted by speed
  bool degenerate = false;                // a continuum of solutions was sampled
};
GeodesicSolutions geodesic_bvp(const Manifold& m, const Point& x, const Point& y, int max_solutions);

// log(1 + rho(x)) with rho a smooth proper surrogate of d^2(x, x0).
struct ContainmentValue {
  double value;
  CotangentVector differential;
};
ContainmentValue containment(const Manifold& m, const Point& x0, const Point& x);

// Curve helpers.
void validate_curve(const Curve& c);
// Intrinsic three-point finite differences through log_map.
std::vector<TangentVector> curve_velocities(const Manifold& m, const Curve& c);
Curve with_velocities(const Manifold& m, Curve c);
// Samples of t -> exp(t v) on a uniform grid of `segments` intervals over [0, duration].
Curve geodesic_curve(const Manifold& m, const TangentVector& v, int segments, double duration = 1.0);

// Canonical points used by configs and tests.
Point origin(const Manifold& m);  // north pole / zero / (0, 1)

// --- Christoffel/RK4 cross-check path (geometry_ode.cpp) -------------------

struct GeodesicOdeResult {
  Point endpoint;
  Vec velocity;
  double step;
};
// Fixed-step RK4 on [0, 1].
GeodesicOdeResult geodesic_ode(const Manifold& m, const TangentVector& v, double step);
// Starts at 1e-3 and halves until two refinements agree to `tol`.
GeodesicOdeResult geodesic_ode_adaptive(const Manifold& m, const TangentVector& v, double tol = 1e-9);
// Joint RK4 for the geodesic and a parallel field along it.
Vec transport_ode(const Manifold& m, const TangentVector& v, const Vec& w, double step);

}  // namespace grw
