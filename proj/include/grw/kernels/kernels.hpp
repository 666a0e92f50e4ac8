#pragma once

// Batched inner loops of the endpoint-rate estimator. Replica state is kept
// structure-of-arrays: coords[d][r] is ambient coordinate d of replica r.
// Every kernel has a scalar reference and, on x86-64, an AVX2 variant; the
// variant is picked once at runtime from CPUID and GRW_SIMD.

#include <cstddef>

namespace grw::kernels {

enum class SimdLevel { Scalar, Avx2 };

struct KernelTable {
  // x <- x + scale * g, coordinate-wise, for n replicas and `dims` coordinates.
  void (*euclidean_step)(double* const* x, const double* const* g, int dims, std::size_t n, double scale);
  // Sphere of radius r: v = scale * (g - <g, x/r> x/r), then
  // x <- cos(|v|/r) x + sinc(|v|/r) v, renormalized to radius r.
  void (*sphere_step)(double* const* x, const double* const* g, int dims, std::size_t n, double scale, double r);
  // #{r : |x_r - target|^2 < radius_sq}.
  std::size_t (*count_ball_hits)(const double* const* x, int dims, std::size_t n, const double* target,
                                 double radius_sq);
  // #{r : <x_r, target> > min_dot}; geodesic balls on the sphere.
  std::size_t (*count_cap_hits)(const double* const* x, int dims, std::size_t n, const double* target,
                                double min_dot);
};

const KernelTable& scalar_table();
// Throws std::runtime_error when the variant was not compiled in.
const KernelTable& avx2_table();

bool avx2_compiled();
// Compiled in and supported by the CPU (AVX2 and FMA).
bool avx2_available();

// Best available level, unless GRW_SIMD=scalar forces the reference path.
SimdLevel detected_level();
SimdLevel active_level();
// Throws std::runtime_error for an unavailable level.
void set_active_level(SimdLevel level);
const KernelTable& active_table();
const char* to_string(SimdLevel level);

}  // namespace grw::kernels
