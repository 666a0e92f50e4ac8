#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, replica, step, draw index), so replicas can be simulated in any order
// and on any number of workers with bit-identical results.

#include <array>
#include <cstdint>

namespace grw {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer; used to derive independent seeds from (seed, tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t replica, std::uint32_t step = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal via Box-Muller.
  double normal();

  // Same seed and replica, fresh counter block for `step`.
  CounterStream at_step(std::uint32_t step) const { return CounterStream(seed_, replica_, step); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replica() const { return replica_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t replica_;
  std::uint32_t step_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace grw
