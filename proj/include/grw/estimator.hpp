#pragma once

// Monte Carlo estimates of large-deviation rates, heat-semigroup checks on the
// sphere and verification of the Brownian exit-time bound.

#include "grw/brownian.hpp"
#include "grw/geometry.hpp"
#include "grw/measures.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace grw {

struct EndpointRateConfig {
  MeasureFamily family;
  Point x0;
  Point target;
  double delta = 0.0;  // <= 0 selects 0.05 d(x0, target), floored at 0.02
  std::vector<int> levels{8, 16, 32, 64};
  std::int64_t replicas = 100000;
  std::uint64_t seed = 0;
  int threads = 1;
  // Fit -log p_n + (k/2) log n instead of -log p_n; removes the polynomial
  // prefactor of a small-ball probability, which otherwise biases short levels.
  bool prefactor_correction = true;
  // Batched SoA kernels for Gaussian steps on flat space and spheres.
  bool use_kernels = true;
};

struct RateEstimate {
  std::vector<int> levels;
  std::vector<std::int64_t> hits;
  std::vector<double> log_probs;  // -(1/n) log p_n; NaN where no hits
  std::vector<bool> dropped;
  double fitted_rate = 0.0;
  double standard_error = 0.0;
  std::int64_t replicas = 0;
  Point target;
  double delta = 0.0;
  double prefactor = 0.0;  // the c in -log p_n + c log n
};

double default_delta(const Manifold& m, const Point& x0, const Point& target);

// Number of replicas whose endpoint A_n = S_n lies within delta of the target.
std::int64_t count_endpoint_hits(const EndpointRateConfig& cfg, int n, double delta);

// Weighted least-squares slope of y_n against n; weights from the Wilson
// interval of each p_n. Throws AllZeroCounts when nothing hit and DomainError
// with fewer than two surviving levels.
RateEstimate fit_rate(const std::vector<int>& levels, const std::vector<std::int64_t>& hits, std::int64_t replicas,
                      double prefactor);

RateEstimate estimate_endpoint_rate(const EndpointRateConfig& cfg);

struct HeatSemigroupRecord {
  double empirical = 0.0;
  double theory = 0.0;
  double z_score = 0.0;
  double standard_error = 0.0;
  std::int64_t replicas = 0;
};

// Mean of the last ambient coordinate of W_t on a sphere against the
// spectral value exp(-k t / (2 r^2)) * x0_last. `substeps` refines the noise
// (see brownian_noise) so runs at dt and dt / 2 can share paths.
HeatSemigroupRecord estimate_heat_semigroup(const Manifold& m, const Point& x0, double t, std::int64_t replicas,
                                            double dt, std::uint64_t seed = 0, int threads = 1, int substeps = 1);

struct HalvingRecord {
  HeatSemigroupRecord coarse;  // step dt
  HeatSemigroupRecord fine;    // step dt / 2, same Brownian paths
  double mean_shift = 0.0;     // fine - coarse
  double shift_in_sigmas = 0.0;
};

HalvingRecord heat_semigroup_dt_halving(const Manifold& m, const Point& x0, double t, std::int64_t replicas,
                                        double dt, std::uint64_t seed = 0, int threads = 1);

struct ExitGridPoint {
  double tau;
  double delta;
};

struct ExitPointReport {
  double tau = 0.0;
  double delta = 0.0;
  std::int64_t exceedances = 0;
  std::int64_t replicas = 0;
  double empirical = 0.0;
  double upper_confidence = 0.0;  // one-sided 99% Clopper-Pearson
  double bound = 0.0;
  bool holds = false;
};

struct ExitBoundReport {
  std::vector<ExitPointReport> points;
  bool pass = false;
};

// Exceedance probabilities of sup_{t <= tau} d(W^eps_t, x0) >= delta, monitored
// on the dt grid, against the bound with L = max(1, Ricci lower bound) and
// the effective time eps * tau.
ExitBoundReport verify_exit_bound(const Manifold& m, const Point& x0, const std::vector<ExitGridPoint>& grid,
                                  double eps, std::int64_t replicas, double dt, std::uint64_t seed = 0,
                                  int threads = 1);

// Runs body(begin, end, worker) over [0, count) in contiguous blocks spread
// across `threads` workers.
void parallel_blocks(std::int64_t count, std::int64_t block, int threads,
                     const std::function<void(std::int64_t, std::int64_t, int)>& body);

}  // namespace grw
