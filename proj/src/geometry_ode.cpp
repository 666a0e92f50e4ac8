// Second-order geodesic equations integrated with classical RK4. Used only to
// cross-check the closed forms in geometry.cpp.

#include "grw/errors.hpp"
#include "grw/geometry.hpp"

#include <cmath>

namespace grw {

namespace {

// State: position, velocity and (optionally) a vector field along the curve.
struct OdeState {
  Vec x;
  Vec xd;
  Vec w;
};

OdeState derivative(const Manifold& m, const OdeState& s) {
  OdeState d{s.xd, Vec::Zero(s.x.size()), Vec::Zero(s.w.size())};
  switch (m.kind()) {
    case ManifoldKind::Euclidean:
      break;
    case ManifoldKind::Sphere: {
      const double r2 = m.radius() * m.radius();
      d.xd = -(s.xd.squaredNorm() / r2) * s.x;
      if (s.w.size() > 0) d.w = -(s.w.dot(s.xd) / r2) * s.x;
      break;
    }
    case ManifoldKind::Hyperbolic2: {
      // Christoffel symbols of b^-2 (da^2 + db^2):
      //   G^a_ab = G^a_ba = -1/b,  G^b_aa = 1/b,  G^b_bb = -1/b.
      const double b = s.x[1];
      const double ad = s.xd[0], bd = s.xd[1];
      d.xd[0] = 2.0 * ad * bd / b;
      d.xd[1] = (bd * bd - ad * ad) / b;
      if (s.w.size() > 0) {
        d.w[0] = (ad * s.w[1] + bd * s.w[0]) / b;
        d.w[1] = (-ad * s.w[0] + bd * s.w[1]) / b;
      }
      break;
    }
  }
  return d;
}

OdeState axpy(const OdeState& s, double h, const OdeState& d) {
  return {s.x + h * d.x, s.xd + h * d.xd, s.w + h * d.w};
}

OdeState integrate(const Manifold& m, OdeState s, double step) {
  if (!(step > 0.0) || step > 1.0) throw DomainError("ode step must lie in (0, 1]");
  const int n = static_cast<int>(std::ceil(1.0 / step - 1e-9));
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const OdeState k1 = derivative(m, s);
    const OdeState k2 = derivative(m, axpy(s, 0.5 * h, k1));
    const OdeState k3 = derivative(m, axpy(s, 0.5 * h, k2));
    const OdeState k4 = derivative(m, axpy(s, h, k3));
    s.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.xd += (h / 6.0) * (k1.xd + 2.0 * k2.xd + 2.0 * k3.xd + k4.xd);
    s.w += (h / 6.0) * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
  }
  return s;
}

}  // namespace

GeodesicOdeResult geodesic_ode(const Manifold& m, const TangentVector& v, double step) {
  const OdeState end = integrate(m, {v.base.coords, v.components, Vec()}, step);
  return {Point(end.x), end.xd, step};
}

GeodesicOdeResult geodesic_ode_adaptive(const Manifold& m, const TangentVector& v, double tol) {
  double step = 1e-3;
  GeodesicOdeResult prev = geodesic_ode(m, v, step);
  double gap = 0.0;
  for (int i = 0; i < 12; ++i) {
    step *= 0.5;
    GeodesicOdeResult next = geodesic_ode(m, v, step);
    gap = (next.endpoint.coords - prev.endpoint.coords).norm();
    if (gap < tol) return next;
    prev = std::move(next);
  }
  throw NonConvergence("geodesic_ode_adaptive: refinements did not agree", 12, gap);
}

Vec transport_ode(const Manifold& m, const TangentVector& v, const Vec& w, double step) {
  return integrate(m, {v.base.coords, v.components, w}, step).w;
}

}  // namespace grw
