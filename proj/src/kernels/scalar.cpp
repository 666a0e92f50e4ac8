#include "grw/kernels/kernels.hpp"

#include <cmath>

namespace grw::kernels {

namespace {

double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0 + t * t * t * t / 120.0;
  return std::sin(t) / t;
}

void euclidean_step(double* const* x, const double* const* g, int dims, std::size_t n, double scale) {
  for (int d = 0; d < dims; ++d)
    for (std::size_t r = 0; r < n; ++r) x[d][r] += scale * g[d][r];
}

void sphere_step(double* const* x, const double* const* g, int dims, std::size_t n, double scale, double radius) {
  const double inv_r2 = 1.0 / (radius * radius);
  for (std::size_t r = 0; r < n; ++r) {
    double gx = 0.0;
    for (int d = 0; d < dims; ++d) gx += g[d][r] * x[d][r];
    gx *= inv_r2;
    double vv = 0.0;
    for (int d = 0; d < dims; ++d) {
      const double v = scale * (g[d][r] - gx * x[d][r]);
      vv += v * v;
    }
    const double phi = std::sqrt(vv) / radius;
    const double c = std::cos(phi);
    const double s = sinc(phi);
    double yy = 0.0;
    for (int d = 0; d < dims; ++d) {
      const double v = scale * (g[d][r] - gx * x[d][r]);
      x[d][r] = c * x[d][r] + s * v;
      yy += x[d][r] * x[d][r];
    }
    const double fix = radius / std::sqrt(yy);
    for (int d = 0; d < dims; ++d) x[d][r] *= fix;
  }
}

std::size_t count_ball_hits(const double* const* x, int dims, std::size_t n, const double* target,
                            double radius_sq) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (int d = 0; d < dims; ++d) {
      const double e = x[d][r] - target[d];
      s += e * e;
    }
    hits += s < radius_sq;
  }
  return hits;
}

std::size_t count_cap_hits(const double* const* x, int dims, std::size_t n, const double* target, double min_dot) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (int d = 0; d < dims; ++d) s += x[d][r] * target[d];
    hits += s > min_dot;
  }
  return hits;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{euclidean_step, sphere_step, count_ball_hits, count_cap_hits};
  return t;
}

}  // namespace grw::kernels
