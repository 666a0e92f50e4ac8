#include "grw/kernels/kernels.hpp"

#include <experimental/simd>

namespace stdx = std::experimental;

namespace grw::kernels {

namespace {

using V = stdx::native_simd<double>;
using M = V::mask_type;
constexpr std::size_t W = V::size();
constexpr int kMaxDims = 16;

V load(const double* p) { return V(p, stdx::element_aligned); }
void store(const V& v, double* p) { v.copy_to(p, stdx::element_aligned); }

// Partial lanes go through a padded copy so the tail runs the same arithmetic.
V load_tail(const double* p, std::size_t count, double pad) {
  alignas(64) double buf[W];
  for (std::size_t i = 0; i < W; ++i) buf[i] = i < count ? p[i] : pad;
  return load(buf);
}
void store_tail(const V& v, double* p, std::size_t count) {
  alignas(64) double buf[W];
  store(v, buf);
  for (std::size_t i = 0; i < count; ++i) p[i] = buf[i];
}

V sinc(const V& t) {
  const V t2 = t * t;
  V out = stdx::sin(t) / t;
  stdx::where(stdx::abs(t) < 1e-4, out) = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  return out;
}

void euclidean_step(double* const* x, const double* const* g, int dims, std::size_t n, double scale) {
  const V s(scale);
  for (int d = 0; d < dims; ++d) {
    std::size_t r = 0;
    for (; r + W <= n; r += W) store(load(x[d] + r) + s * load(g[d] + r), x[d] + r);
    for (; r < n; ++r) x[d][r] += scale * g[d][r];
  }
}

void sphere_block(double* const* x, const double* const* g, int dims, std::size_t r, std::size_t count,
                  double scale, double radius) {
  V xs[kMaxDims], gs[kMaxDims];
  for (int d = 0; d < dims; ++d) {
    const double pad = d == 0 ? radius : 0.0;
    xs[d] = count == W ? load(x[d] + r) : load_tail(x[d] + r, count, pad);
    gs[d] = count == W ? load(g[d] + r) : load_tail(g[d] + r, count, 0.0);
  }
  V gx(0.0);
  for (int d = 0; d < dims; ++d) gx += gs[d] * xs[d];
  gx *= 1.0 / (radius * radius);
  V vv(0.0);
  for (int d = 0; d < dims; ++d) {
    gs[d] = scale * (gs[d] - gx * xs[d]);
    vv += gs[d] * gs[d];
  }
  const V phi = stdx::sqrt(vv) / radius;
  const V c = stdx::cos(phi);
  const V s = sinc(phi);
  V yy(0.0);
  for (int d = 0; d < dims; ++d) {
    xs[d] = c * xs[d] + s * gs[d];
    yy += xs[d] * xs[d];
  }
  const V fix = radius / stdx::sqrt(yy);
  for (int d = 0; d < dims; ++d) {
    if (count == W)
      store(xs[d] * fix, x[d] + r);
    else
      store_tail(xs[d] * fix, x[d] + r, count);
  }
}

void sphere_step(double* const* x, const double* const* g, int dims, std::size_t n, double scale, double radius) {
  if (dims > kMaxDims) return scalar_table().sphere_step(x, g, dims, n, scale, radius);
  for (std::size_t r = 0; r < n; r += W) sphere_block(x, g, dims, r, n - r < W ? n - r : W, scale, radius);
}

std::size_t count_ball_hits(const double* const* x, int dims, std::size_t n, const double* target,
                            double radius_sq) {
  if (dims > kMaxDims) return scalar_table().count_ball_hits(x, dims, n, target, radius_sq);
  std::size_t hits = 0;
  std::size_t r = 0;
  for (; r + W <= n; r += W) {
    V s(0.0);
    for (int d = 0; d < dims; ++d) {
      const V e = load(x[d] + r) - target[d];
      s += e * e;
    }
    hits += static_cast<std::size_t>(stdx::popcount(s < radius_sq));
  }
  if (r == n) return hits;
  const double* tail[kMaxDims];
  for (int d = 0; d < dims; ++d) tail[d] = x[d] + r;
  return hits + scalar_table().count_ball_hits(tail, dims, n - r, target, radius_sq);
}

std::size_t count_cap_hits(const double* const* x, int dims, std::size_t n, const double* target, double min_dot) {
  if (dims > kMaxDims) return scalar_table().count_cap_hits(x, dims, n, target, min_dot);
  std::size_t hits = 0;
  std::size_t r = 0;
  for (; r + W <= n; r += W) {
    V s(0.0);
    for (int d = 0; d < dims; ++d) s += load(x[d] + r) * target[d];
    hits += static_cast<std::size_t>(stdx::popcount(s > min_dot));
  }
  if (r == n) return hits;
  const double* tail[kMaxDims];
  for (int d = 0; d < dims; ++d) tail[d] = x[d] + r;
  return hits + scalar_table().count_cap_hits(tail, dims, n - r, target, min_dot);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{euclidean_step, sphere_step, count_ball_hits, count_cap_hits};
  return t;
}

}  // namespace grw::kernels
