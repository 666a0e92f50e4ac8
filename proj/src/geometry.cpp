#include "grw/geometry.hpp"

#include "grw/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace grw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPointTolerance = 1e-10;

// sin(t)/t and sinh(t)/t without the removable singularity.
double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0 + t * t * t * t / 120.0;
  return std::sin(t) / t;
}

double sinhc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 + t * t / 6.0 + t * t * t * t / 120.0;
  return std::sinh(t) / t;
}

void check_same_size(const Manifold& m, const Vec& v, const char* what) {
  if (v.size() != m.ambient_dim()) {
    std::ostringstream os;
    os << what << " has " << v.size() << " components, expected " << m.ambient_dim();
    throw InvalidPoint(os.str());
  }
}

// Angle between two sphere points, computed with atan2 so it stays accurate
// near 0 and near pi. Also returns the unit direction u of the great circle
// (orthogonal to x) when it exists.
struct SphereAngle {
  double theta;
  Vec u;
  double s;  // |u| before normalization
};

SphereAngle sphere_angle(const Manifold& m, const Vec& x, const Vec& y) {
  const double r = m.radius();
  const Vec xh = x / r;
  const Vec yh = y / r;
  const double c = xh.dot(yh);
  Vec u = yh - c * xh;
  const double s = u.norm();
  return {std::atan2(s, c), std::move(u), s};
}

// Hyperbolic plane, upper half-plane chart.

double hyperbolic_distance(const Vec& x, const Vec& y) {
  const double da = y[0] - x[0];
  const double db = y[1] - x[1];
  const double q = (da * da + db * db) / (4.0 * x[1] * y[1]);
  return 2.0 * std::asinh(std::sqrt(q));
}

Vec hyperbolic_log(const Vec& x, const Vec& y) {
  const double d = hyperbolic_distance(x, y);
  const double a = x[0], b = x[1], c = y[0], e = y[1];
  const double dc = c - a;
  Vec v(2);
  v[0] = b * dc / e;
  v[1] = (dc * dc + (e - b) * (e + b)) / (2.0 * e);
  return v / sinhc(d);
}

Vec hyperbolic_exp(const Vec& x, const Vec& v) {
  const double a = x[0], b = x[1];
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1]) / b;
  const double ch = std::cosh(n);
  const double sc = sinhc(n);
  // Hyperboloid coordinates Q0 - Q2 and Q1 of the endpoint, expanded so the
  // chart map back is free of cancellation.
  const double q02 = ch / b - sc * v[1] / (b * b);
  const double q1 = ch * a / b + sc * (v[0] / b - a * v[1] / (b * b));
  const double bn = 1.0 / q02;
  Vec out(2);
  out[0] = q1 * bn;
  out[1] = bn;
  return out;
}

// Transport in the hyperbolic plane: a parallel field keeps its angle with the
// geodesic's unit tangent, in the orientation-preserving orthonormal frame b*e_i.
Vec hyperbolic_transport(const Vec& x, const Vec& v, const Vec& w) {
  const double speed = std::sqrt(v[0] * v[0] + v[1] * v[1]) / x[1];
  if (speed == 0.0) return w;
  const Vec y = hyperbolic_exp(x, v);
  const Vec t0 = v / (x[1] * speed);
  const Vec t1 = -hyperbolic_log(y, x) / (y[1] * speed);
  const Vec om = w / x[1];
  const double along = om.dot(t0);
  const double across = -om[0] * t0[1] + om[1] * t0[0];
  Vec t1perp(2);
  t1perp << -t1[1], t1[0];
  return y[1] * (along * t1 + across * t1perp);
}

Vec sphere_exp(const Manifold& m, const Vec& x, const Vec& v) {
  const double r = m.radius();
  const double a = v.norm();
  Vec y = std::cos(a / r) * x + sinc(a / r) * v;
  return y * (r / y.norm());
}

Vec sphere_transport(const Manifold& m, const Vec& x, const Vec& v, const Vec& w) {
  const double r = m.radius();
  const double a = v.norm();
  if (a == 0.0) return w;
  const Vec u = v / a;
  const Vec xh = x / r;
  const double phi = a / r;
  const double wu = w.dot(u);
  Vec out = w + wu * ((std::cos(phi) - 1.0) * u - std::sin(phi) * xh);
  // Project onto the tangent space at the endpoint to remove drift.
  const Vec yh = std::cos(phi) * xh + std::sin(phi) * u;
  return out - out.dot(yh) * yh;
}

Vec representation_metric_diag(const Manifold& m, const Point& x) {
  Vec d = Vec::Ones(m.ambient_dim());
  if (m.kind() == ManifoldKind::Hyperbolic2) d /= (x[1] * x[1]);
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------

Manifold Manifold::euclidean(int dim) {
  if (dim < 1) throw DomainError("euclidean dimension must be >= 1");
  return Manifold(ManifoldKind::Euclidean, dim, 0.0);
}

Manifold Manifold::sphere(double radius, int dim) {
  if (dim < 1) throw DomainError("sphere dimension must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("sphere radius must be > 0");
  return Manifold(ManifoldKind::Sphere, dim, radius);
}

Manifold Manifold::hyperbolic2() { return Manifold(ManifoldKind::Hyperbolic2, 2, 1.0); }

double Manifold::ricci_lower_bound() const {
  switch (kind_) {
    case ManifoldKind::Hyperbolic2:
      return 1.0;
    case ManifoldKind::Sphere:
    case ManifoldKind::Euclidean:
      return 0.0;
  }
  return 0.0;
}

double Manifold::injectivity_radius(const Point& x) const {
  validate_point(*this, x);
  if (kind_ == ManifoldKind::Sphere) return kPi * radius_;
  return kInfiniteRadius;
}

std::string Manifold::name() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case ManifoldKind::Euclidean:
      os << "euclidean:" << dim_;
      break;
    case ManifoldKind::Sphere:
      os << "sphere:" << radius_;
      if (dim_ != 2) os << ":" << dim_;
      break;
    case ManifoldKind::Hyperbolic2:
      os << "hyperbolic";
      break;
  }
  return os.str();
}

void validate_point(const Manifold& m, const Point& x) {
  check_same_size(m, x.coords, "point");
  if (!x.coords.allFinite()) throw InvalidPoint("point has non-finite coordinates");
  switch (m.kind()) {
    case ManifoldKind::Sphere:
      if (std::abs(x.coords.norm() - m.radius()) > kPointTolerance * std::max(1.0, m.radius())) {
        std::ostringstream os;
        os.precision(17);
        os << "point is off the sphere: |x| = " << x.coords.norm() << ", radius " << m.radius();
        throw InvalidPoint(os.str());
      }
      break;
    case ManifoldKind::Hyperbolic2:
      if (!(x[1] > 0.0)) throw InvalidPoint("half-plane point needs a positive height");
      break;
    case ManifoldKind::Euclidean:
      break;
  }
}

Point normalize_point(const Manifold& m, const Point& x) {
  if (m.kind() != ManifoldKind::Sphere) return x;
  return Point(x.coords * (m.radius() / x.coords.norm()));
}

Vec project_tangent(const Manifold& m, const Point& x, const Vec& v) {
  if (m.kind() != ManifoldKind::Sphere) return v;
  const Vec xh = x.coords / x.coords.norm();
  return v - v.dot(xh) * xh;
}

Point origin(const Manifold& m) {
  Vec c = Vec::Zero(m.ambient_dim());
  if (m.kind() == ManifoldKind::Sphere) c[m.dim()] = m.radius();
  if (m.kind() == ManifoldKind::Hyperbolic2) c[1] = 1.0;
  return Point(std::move(c));
}

Mat natural_frame(const Manifold& m, const Point& x) {
  validate_point(m, x);
  if (m.kind() != ManifoldKind::Sphere) return Mat::Identity(m.dim(), m.dim());

  const int k = m.dim();
  const Point pole = origin(m);
  Mat ref = Mat::Zero(k + 1, k);
  for (int i = 0; i < k; ++i) ref(i, i) = 1.0;

  const SphereAngle ang = sphere_angle(m, pole.coords, x.coords);
  Mat frame(k + 1, k);
  if (kPi - ang.theta < 1e-6) {
    // South pole: transport along the e_0 meridian.
    frame = ref;
    frame.col(0) = -ref.col(0);
    return frame;
  }
  Vec v = Vec::Zero(k + 1);
  if (ang.s > 0.0) v = m.radius() * ang.theta * ang.u / ang.s;
  for (int i = 0; i < k; ++i) frame.col(i) = sphere_transport(m, pole.coords, v, ref.col(i));
  // Gram-Schmidt in the ambient metric.
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j) frame.col(i) -= frame.col(i).dot(frame.col(j)) * frame.col(j);
    frame.col(i).normalize();
  }
  return frame;
}

Mat orthonormal_frame(const Manifold& m, const Point& x) {
  Mat f = natural_frame(m, x);
  if (m.kind() == ManifoldKind::Hyperbolic2) f *= x[1];
  return f;
}

Mat metric_at(const Manifold& m, const Point& x) {
  const Mat f = natural_frame(m, x);
  const Vec d = representation_metric_diag(m, x);
  Mat g = f.transpose() * d.asDiagonal() * f;
  return 0.5 * (g + g.transpose());
}

double inner(const Manifold& m, const Point& x, const Vec& v, const Vec& w) {
  const double dot = v.dot(w);
  if (m.kind() == ManifoldKind::Hyperbolic2) return dot / (x[1] * x[1]);
  return dot;
}

double norm(const Manifold& m, const TangentVector& v) {
  return std::sqrt(inner(m, v.base, v.components, v.components));
}

double norm(const Manifold& m, const CotangentVector& p) {
  const double n = p.components.norm();
  if (m.kind() == ManifoldKind::Hyperbolic2) return n * p.base[1];
  return n;
}

double pairing(const CotangentVector& p, const TangentVector& v) { return p.components.dot(v.components); }

CotangentVector lower(const Manifold& m, const TangentVector& v) {
  return {v.base, representation_metric_diag(m, v.base).cwiseProduct(v.components)};
}

TangentVector raise(const Manifold& m, const CotangentVector& p) {
  Vec c = p.components.cwiseQuotient(representation_metric_diag(m, p.base));
  return {p.base, project_tangent(m, p.base, c)};
}

Point exp_map(const Manifold& m, const TangentVector& v) {
  const Vec& x = v.base.coords;
  check_same_size(m, v.components, "tangent vector");
  switch (m.kind()) {
    case ManifoldKind::Euclidean:
      return Point(x + v.components);
    case ManifoldKind::Sphere:
      return Point(sphere_exp(m, x, v.components));
    case ManifoldKind::Hyperbolic2:
      return Point(hyperbolic_exp(x, v.components));
  }
  return v.base;
}

TangentVector log_map(const Manifold& m, const Point& x, const Point& y) {
  switch (m.kind()) {
    case ManifoldKind::Euclidean:
      return {x, y.coords - x.coords};
    case ManifoldKind::Sphere: {
      const SphereAngle ang = sphere_angle(m, x.coords, y.coords);
      if (kPi - ang.theta < kCutLocusTolerance)
        throw CutLocusError("log_map: points are antipodal on the sphere");
      if (ang.s == 0.0) return {x, Vec::Zero(m.ambient_dim())};
      return {x, (m.radius() * ang.theta / ang.s) * ang.u};
    }
    case ManifoldKind::Hyperbolic2:
      return {x, hyperbolic_log(x.coords, y.coords)};
  }
  return {x, Vec::Zero(m.ambient_dim())};
}

double distance(const Manifold& m, const Point& x, const Point& y) {
  switch (m.kind()) {
    case ManifoldKind::Euclidean:
      return (y.coords - x.coords).norm();
    case ManifoldKind::Sphere:
      return m.radius() * sphere_angle(m, x.coords, y.coords).theta;
    case ManifoldKind::Hyperbolic2:
      return hyperbolic_distance(x.coords, y.coords);
  }
  return 0.0;
}

TangentVector transport_along_geodesic(const Manifold& m, const TangentVector& v, const Vec& w) {
  const Point y = exp_map(m, v);
  switch (m.kind()) {
    case ManifoldKind::Euclidean:
      return {y, w};
    case ManifoldKind::Sphere:
      return {y, sphere_transport(m, v.base.coords, v.components, w)};
    case ManifoldKind::Hyperbolic2:
      return {y, hyperbolic_transport(v.base.coords, v.components, w)};
  }
  return {y, w};
}

void validate_curve(const Curve& c) {
  if (c.points.empty()) throw DegenerateCurve("curve has no points");
  if (c.times.size() != c.points.size()) throw DegenerateCurve("curve times and points differ in length");
  for (std::size_t i = 1; i < c.times.size(); ++i)
    if (!(c.times[i] > c.times[i - 1])) throw DegenerateCurve("curve times must be strictly increasing");
  if (!c.velocities.empty() && c.velocities.size() != c.points.size())
    throw DegenerateCurve("curve velocities are not aligned with points");
}

TangentVector parallel_transport(const Manifold& m, const Curve& c, const TangentVector& v,
                                 TransportMethod method) {
  validate_curve(c);
  if ((v.base.coords - c.points.front().coords).norm() > 1e-8)
    throw InvalidPoint("parallel_transport: vector is not based at the curve start");
  Vec w = v.components;
  Point at = c.points.front();
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const TangentVector step = log_map(m, at, c.points[i]);
    if (method == TransportMethod::ClosedForm) {
      TangentVector moved = transport_along_geodesic(m, step, w);
      w = std::move(moved.components);
    } else {
      w = project_tangent(m, c.points[i], transport_ode(m, step, w, 1e-2));
    }
    // Continue from the sample itself so drift in exp does not accumulate.
    at = c.points[i];
  }
  return {at, w};
}

CotangentVector parallel_transport(const Manifold& m, const Curve& c, const CotangentVector& p,
                                   TransportMethod method) {
  // Transport is an isometry, so tau p = (tau p#)_flat.
  const TangentVector sharp = raise(m, p);
  return lower(m, parallel_transport(m, c, sharp, method));
}

SqDistanceGradient grad_sq_distance(const Manifold& m, const Point& x, const Point& y) {
  const TangentVector to_y = log_map(m, x, y);
  const TangentVector to_x = log_map(m, y, x);
  CotangentVector dx = lower(m, to_y);
  CotangentVector dy = lower(m, to_x);
  dx.components *= -2.0;
  dy.components *= -2.0;
  return {std::move(dx), std::move(dy)};
}

GeodesicSolutions geodesic_bvp(const Manifold& m, const Point& x, const Point& y, int max_solutions) {
  validate_point(m, x);
  validate_point(m, y);
  if (max_solutions < 1) throw DomainError("geodesic_bvp: max_solutions must be >= 1");
  GeodesicSolutions out;

  if (m.kind() != ManifoldKind::Sphere) {
    out.velocities.push_back(log_map(m, x, y));
  } else {
    const double r = m.radius();
    const double loop = 2.0 * kPi * r;
    const SphereAngle ang = sphere_angle(m, x.coords, y.coords);
    const Mat frame = natural_frame(m, x);

    if (kPi - ang.theta < kCutLocusTolerance) {
      // Every direction reaches the antipode at speed pi r: sample the circle.
      out.degenerate = true;
      for (int j = 0; j < max_solutions; ++j) {
        Vec dir;
        if (m.dim() == 1) {
          dir = (j % 2 == 0 ? 1.0 : -1.0) * frame.col(0);
        } else {
          const double phi = 2.0 * kPi * j / max_solutions;
          dir = std::cos(phi) * frame.col(0) + std::sin(phi) * frame.col(1);
        }
        out.velocities.push_back({x, kPi * r * dir});
      }
    } else if (ang.s == 0.0 || ang.theta < 1e-14) {
      // x == y: the constant geodesic, then whole loops in a canonical direction.
      out.velocities.push_back({x, Vec::Zero(m.ambient_dim())});
      for (int j = 1; j < max_solutions; ++j) out.velocities.push_back({x, j * loop * frame.col(0)});
      out.degenerate = max_solutions > 1;
    } else {
      const Vec u = ang.u / ang.s;
      const double d = r * ang.theta;
      for (int j = 0; static_cast<int>(out.velocities.size()) < max_solutions; ++j) {
        out.velocities.push_back({x, (d + j * loop) * u});
        if (static_cast<int>(out.velocities.size()) < max_solutions)
          out.velocities.push_back({x, -((j + 1) * loop - d) * u});
      }
    }
  }

  for (const auto& v : out.velocities) {
    const double residual = (exp_map(m, v).coords - y.coords).norm();
    if (residual > 1e-8) throw NonConvergence("geodesic_bvp: exp residual too large", 0, residual);
  }
  return out;
}

ContainmentValue containment(const Manifold& m, const Point& x0, const Point& x) {
  double rho = 0.0;
  Vec drho;
  switch (m.kind()) {
    case ManifoldKind::Euclidean: {
      const Vec diff = x.coords - x0.coords;
      rho = diff.squaredNorm();
      drho = 2.0 * diff;
      break;
    }
    case ManifoldKind::Sphere: {
      // Chord length squared: 2 r (r - <x, x0> / r).
      rho = (x.coords - x0.coords).squaredNorm();
      drho = project_tangent(m, x, -2.0 * x0.coords);
      break;
    }
    case ManifoldKind::Hyperbolic2: {
      // 2 (cosh d - 1) in closed form.
      const double a = x[0], b = x[1], c = x0[0], e = x0[1];
      const double da = a - c, db = b - e;
      const double q = da * da + db * db;
      rho = q / (b * e);
      drho = Vec(2);
      drho[0] = 2.0 * da / (b * e);
      drho[1] = (2.0 * db * b - q) / (b * b * e);
      break;
    }
  }
  return {std::log1p(rho), {x, drho / (1.0 + rho)}};
}

std::vector<TangentVector> curve_velocities(const Manifold& m, const Curve& c) {
  validate_curve(c);
  const std::size_t n = c.points.size();
  std::vector<TangentVector> out;
  out.reserve(n);
  if (n == 1) {
    out.push_back({c.points[0], Vec::Zero(m.ambient_dim())});
    return out;
  }
  if (n == 2) {
    const double h = c.times[1] - c.times[0];
    out.push_back({c.points[0], log_map(m, c.points[0], c.points[1]).components / h});
    out.push_back({c.points[1], -log_map(m, c.points[1], c.points[0]).components / h});
    return out;
  }
  // One-sided quadratic fit through log_x(x_{i+1}), log_x(x_{i+2}) with signed offsets.
  auto one_sided = [&](std::size_t i, std::size_t j1, std::size_t j2) {
    const double h1 = c.times[j1] - c.times[i];
    const double h2 = c.times[j2] - c.times[i];
    const Vec l1 = log_map(m, c.points[i], c.points[j1]).components;
    const Vec l2 = log_map(m, c.points[i], c.points[j2]).components;
    return Vec((l1 * h2 * h2 - l2 * h1 * h1) / (h1 * h2 * (h2 - h1)));
  };
  out.push_back({c.points[0], one_sided(0, 1, 2)});
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = c.times[i] - c.times[i - 1];
    const double hp = c.times[i + 1] - c.times[i];
    const Vec lp = log_map(m, c.points[i], c.points[i + 1]).components;
    const Vec lm = log_map(m, c.points[i], c.points[i - 1]).components;
    out.push_back({c.points[i], (hm * hm * lp - hp * hp * lm) / (hp * hm * (hp + hm))});
  }
  out.push_back({c.points[n - 1], one_sided(n - 1, n - 2, n - 3)});
  return out;
}

Curve with_velocities(const Manifold& m, Curve c) {
  if (c.velocities.empty()) c.velocities = curve_velocities(m, c);
  return c;
}

Curve geodesic_curve(const Manifold& m, const TangentVector& v, int segments, double duration) {
  if (segments < 1) throw DomainError("geodesic_curve: segments must be >= 1");
  if (!(duration > 0.0)) throw DomainError("geodesic_curve: duration must be > 0");
  Curve c;
  for (int j = 0; j <= segments; ++j) {
    const double s = static_cast<double>(j) / segments;
    const TangentVector partial{v.base, s * v.components};
    TangentVector vel = transport_along_geodesic(m, partial, v.components / duration);
    c.times.push_back(s * duration);
    c.points.push_back(vel.base);
    c.velocities.push_back(std::move(vel));
  }
  return c;
}

}  // namespace grw
