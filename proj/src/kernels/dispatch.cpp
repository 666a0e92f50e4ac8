#include "grw/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace grw::kernels {

#ifndef GRW_HAVE_AVX2_KERNELS
const KernelTable& avx2_table() { throw std::runtime_error("AVX2 kernels not compiled in"); }
#endif

bool avx2_compiled() {
#ifdef GRW_HAVE_AVX2_KERNELS
  return true;
#else
  return false;
#endif
}

bool avx2_available() {
#if defined(GRW_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

SimdLevel detected_level() {
  if (const char* env = std::getenv("GRW_SIMD"); env && std::string_view(env) == "scalar") return SimdLevel::Scalar;
  return avx2_available() ? SimdLevel::Avx2 : SimdLevel::Scalar;
}

namespace {

std::atomic<int>& level_slot() {
  static std::atomic<int> slot{static_cast<int>(detected_level())};
  return slot;
}

}  // namespace

SimdLevel active_level() { return static_cast<SimdLevel>(level_slot().load()); }

void set_active_level(SimdLevel level) {
  if (level == SimdLevel::Avx2 && !avx2_available()) throw std::runtime_error("AVX2 kernels unavailable");
  level_slot().store(static_cast<int>(level));
}

const KernelTable& active_table() {
  return active_level() == SimdLevel::Avx2 ? avx2_table() : scalar_table();
}

const char* to_string(SimdLevel level) { return level == SimdLevel::Avx2 ? "avx2" : "scalar"; }

}  // namespace grw::kernels
