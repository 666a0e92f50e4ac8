#include "grw/estimator.hpp"

#include "grw/errors.hpp"
#include "grw/kernels/kernels.hpp"
#include "grw/rng.hpp"
#include "grw/walks.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace grw {

namespace {

constexpr std::int64_t kBlock = 4096;
constexpr double kWilsonZ = 1.959963984540054;

bool kernel_supported(const EndpointRateConfig& cfg) {
  if (!cfg.use_kernels || cfg.family.kind() != FamilyKind::IsotropicGaussian) return false;
  const ManifoldKind k = cfg.family.manifold().kind();
  return k == ManifoldKind::Euclidean || k == ManifoldKind::Sphere;
}

std::int64_t batched_hits(const EndpointRateConfig& cfg, int n, double delta, std::uint64_t level_seed,
                          std::int64_t begin, std::int64_t end) {
  const Manifold& m = cfg.family.manifold();
  const kernels::KernelTable& kt = kernels::active_table();
  const int dims = m.ambient_dim();
  const auto count = static_cast<std::size_t>(end - begin);
  std::vector<std::vector<double>> x(dims), g(dims);
  std::vector<double*> xp(dims);
  std::vector<const double*> gp(dims);
  for (int d = 0; d < dims; ++d) {
    x[d].assign(count, cfg.x0[d]);
    g[d].resize(count);
    xp[d] = x[d].data();
    gp[d] = g[d].data();
  }
  const bool sphere = m.kind() == ManifoldKind::Sphere;
  for (int step = 0; step < n; ++step) {
    for (std::size_t r = 0; r < count; ++r) {
      CounterStream rng(level_seed, static_cast<std::uint64_t>(begin) + r, static_cast<std::uint32_t>(step));
      for (int d = 0; d < dims; ++d) g[d][r] = rng.normal();
    }
    if (sphere)
      kt.sphere_step(xp.data(), gp.data(), dims, count, 1.0 / n, m.radius());
    else
      kt.euclidean_step(xp.data(), gp.data(), dims, count, 1.0 / n);
  }
  const double* const* cx = xp.data();
  if (sphere) {
    const double r = m.radius();
    return static_cast<std::int64_t>(
        kt.count_cap_hits(cx, dims, count, cfg.target.coords.data(), r * r * std::cos(delta / r)));
  }
  return static_cast<std::int64_t>(kt.count_ball_hits(cx, dims, count, cfg.target.coords.data(), delta * delta));
}

std::int64_t generic_hits(const EndpointRateConfig& cfg, int n, double delta, std::uint64_t level_seed,
                          std::int64_t begin, std::int64_t end) {
  const Manifold& m = cfg.family.manifold();
  std::int64_t hits = 0;
  WalkConfig w{cfg.family, cfg.x0, n, 1.0, level_seed, 0};
  for (std::int64_t r = begin; r < end; ++r) {
    w.replica = static_cast<std::uint64_t>(r);
    hits += distance(m, walk_endpoint(w), cfg.target) < delta;
  }
  return hits;
}

struct Wilson {
  double lower;
  double upper;
};

Wilson wilson_interval(std::int64_t hits, std::int64_t trials) {
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = kWilsonZ / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(centre - half, 0.0), std::min(centre + half, 1.0)};
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_standard_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

void parallel_blocks(std::int64_t count, std::int64_t block, int threads,
                     const std::function<void(std::int64_t, std::int64_t, int)>& body) {
  const std::int64_t blocks = (count + block - 1) / block;
  const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(blocks, 1)));
  auto run = [&](int w) {
    for (std::int64_t b = w; b < blocks; b += workers) body(b * block, std::min(count, (b + 1) * block), w);
  };
  if (workers == 1) {
    run(0);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
  for (auto& t : pool) t.join();
}

double default_delta(const Manifold& m, const Point& x0, const Point& target) {
  return std::max(0.05 * distance(m, x0, target), 0.02);
}

std::int64_t count_endpoint_hits(const EndpointRateConfig& cfg, int n, double delta) {
  const std::uint64_t level_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(n));
  const bool batched = kernel_supported(cfg);
  std::vector<std::int64_t> per_worker(static_cast<std::size_t>(std::max(cfg.threads, 1)), 0);
  parallel_blocks(cfg.replicas, kBlock, cfg.threads, [&](std::int64_t b, std::int64_t e, int w) {
    per_worker[static_cast<std::size_t>(w)] +=
        batched ? batched_hits(cfg, n, delta, level_seed, b, e) : generic_hits(cfg, n, delta, level_seed, b, e);
  });
  std::int64_t total = 0;
  for (auto h : per_worker) total += h;
  return total;
}

RateEstimate fit_rate(const std::vector<int>& levels, const std::vector<std::int64_t>& hits, std::int64_t replicas,
                      double prefactor) {
  RateEstimate out;
  out.levels = levels;
  out.hits = hits;
  out.replicas = replicas;
  out.prefactor = prefactor;
  std::vector<double> ns, ys, ws;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double n = levels[i];
    if (hits[i] == 0) {
      out.log_probs.push_back(std::numeric_limits<double>::quiet_NaN());
      out.dropped.push_back(true);
      continue;
    }
    const double p = static_cast<double>(hits[i]) / static_cast<double>(replicas);
    out.log_probs.push_back(-std::log(p) / n);
    out.dropped.push_back(false);
    const Wilson ci = wilson_interval(hits[i], replicas);
    const double sd = (std::log(ci.upper) - std::log(ci.lower)) / (2.0 * kWilsonZ);
    ns.push_back(n);
    ys.push_back(-std::log(p) + prefactor * std::log(n));
    ws.push_back(1.0 / (sd * sd));
  }
  if (ns.empty()) throw AllZeroCounts("estimate_endpoint_rate: no level registered a hit");
  if (ns.size() < 2) throw DomainError("estimate_endpoint_rate: fewer than two levels with hits");
  double sw = 0.0, sn = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sw += ws[i];
    sn += ws[i] * ns[i];
    sy += ws[i] * ys[i];
  }
  const double nbar = sn / sw, ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sxx += ws[i] * (ns[i] - nbar) * (ns[i] - nbar);
    sxy += ws[i] * (ns[i] - nbar) * (ys[i] - ybar);
  }
  out.fitted_rate = sxy / sxx;
  out.standard_error = 1.0 / std::sqrt(sxx);
  return out;
}

RateEstimate estimate_endpoint_rate(const EndpointRateConfig& cfg) {
  const Manifold& m = cfg.family.manifold();
  validate_point(m, cfg.x0);
  validate_point(m, cfg.target);
  if (cfg.replicas < 1000) throw DomainError("estimate_endpoint_rate: replicas must be >= 1000");
  if (cfg.levels.empty()) throw DomainError("estimate_endpoint_rate: no levels");
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    if (cfg.levels[i] < 1) throw DomainError("estimate_endpoint_rate: levels must be >= 1");
    if (i > 0 && cfg.levels[i] <= cfg.levels[i - 1])
      throw DomainError("estimate_endpoint_rate: levels must be strictly increasing");
  }
  const double delta = cfg.delta > 0.0 ? cfg.delta : default_delta(m, cfg.x0, cfg.target);
  if (m.kind() == ManifoldKind::Sphere && delta >= std::numbers::pi * m.radius())
    throw DomainError("estimate_endpoint_rate: delta covers the whole sphere");

  std::vector<std::int64_t> hits;
  for (int n : cfg.levels) hits.push_back(count_endpoint_hits(cfg, n, delta));
  RateEstimate out = fit_rate(cfg.levels, hits, cfg.replicas, cfg.prefactor_correction ? 0.5 * m.dim() : 0.0);
  out.target = cfg.target;
  out.delta = delta;
  return out;
}

HeatSemigroupRecord estimate_heat_semigroup(const Manifold& m, const Point& x0, double t, std::int64_t replicas,
                                            double dt, std::uint64_t seed, int threads, int substeps) {
  if (m.kind() != ManifoldKind::Sphere) throw DomainError("estimate_heat_semigroup: needs a sphere");
  if (!(t >= 0.0)) throw DomainError("estimate_heat_semigroup: t must be >= 0");
  if (replicas < 1) throw DomainError("estimate_heat_semigroup: replicas must be >= 1");
  validate_point(m, x0);
  const int last = m.ambient_dim() - 1;
  std::vector<double> values(static_cast<std::size_t>(replicas));
  parallel_blocks(replicas, 256, threads, [&](std::int64_t b, std::int64_t e, int) {
    for (std::int64_t r = b; r < e; ++r) {
      const NoiseSource noise = brownian_noise(seed, static_cast<std::uint64_t>(r), m.dim(), dt, substeps);
      double end_value = x0[last];
      simulate_brownian(m, x0, 1.0, t, dt, noise,
                        [&](std::size_t, double, const FrameState& s) { end_value = s.x[last]; });
      values[static_cast<std::size_t>(r)] = end_value;
    }
  });
  HeatSemigroupRecord rec;
  rec.replicas = replicas;
  rec.empirical = sample_mean(values);
  rec.standard_error = sample_standard_error(values, rec.empirical);
  const double r = m.radius();
  rec.theory = std::exp(-m.dim() * t / (2.0 * r * r)) * x0[last];
  rec.z_score = rec.standard_error > 0.0 ? (rec.empirical - rec.theory) / rec.standard_error : 0.0;
  return rec;
}

HalvingRecord heat_semigroup_dt_halving(const Manifold& m, const Point& x0, double t, std::int64_t replicas,
                                        double dt, std::uint64_t seed, int threads) {
  HalvingRecord out;
  out.coarse = estimate_heat_semigroup(m, x0, t, replicas, dt, seed, threads, 2);
  out.fine = estimate_heat_semigroup(m, x0, t, replicas, 0.5 * dt, seed, threads, 1);
  out.mean_shift = out.fine.empirical - out.coarse.empirical;
  const double sigma = out.coarse.standard_error;
  out.shift_in_sigmas = sigma > 0.0 ? std::abs(out.mean_shift) / sigma : 0.0;
  return out;
}

ExitBoundReport verify_exit_bound(const Manifold& m, const Point& x0, const std::vector<ExitGridPoint>& grid,
                                  double eps, std::int64_t replicas, double dt, std::uint64_t seed, int threads) {
  validate_point(m, x0);
  if (!(eps > 0.0)) throw DomainError("verify_exit_bound: eps must be > 0");
  if (replicas < 1) throw DomainError("verify_exit_bound: replicas must be >= 1");
  if (grid.empty()) throw DomainError("verify_exit_bound: empty grid");
  const double L = std::max(1.0, m.ricci_lower_bound());
  ExitBoundReport report;
  double horizon = 0.0;
  std::vector<std::size_t> check_step;
  for (const auto& g : grid) {
    ExitPointReport p;
    p.tau = g.tau;
    p.delta = g.delta;
    p.replicas = replicas;
    p.bound = exit_bound(m.dim(), L, eps * g.tau, g.delta);
    report.points.push_back(p);
    horizon = std::max(horizon, g.tau);
    check_step.push_back(brownian_step_count(g.tau, dt));
  }

  const std::size_t gn = grid.size();
  const int workers = std::max(threads, 1);
  std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(workers), std::vector<std::int64_t>(gn, 0));
  parallel_blocks(replicas, 256, threads, [&](std::int64_t b, std::int64_t e, int w) {
    std::vector<double> running(gn);
    for (std::int64_t r = b; r < e; ++r) {
      std::fill(running.begin(), running.end(), 0.0);
      const NoiseSource noise = brownian_noise(seed, static_cast<std::uint64_t>(r), m.dim(), dt);
      simulate_brownian(m, x0, eps, horizon, dt, noise, [&](std::size_t step, double, const FrameState& s) {
        if (step == 0) return;
        const double d = distance(m, s.x, x0);
        for (std::size_t i = 0; i < gn; ++i)
          if (step <= check_step[i]) running[i] = std::max(running[i], d);
      });
      for (std::size_t i = 0; i < gn; ++i) counts[static_cast<std::size_t>(w)][i] += running[i] >= grid[i].delta;
    }
  });

  report.pass = true;
  for (std::size_t i = 0; i < gn; ++i) {
    ExitPointReport& p = report.points[i];
    for (const auto& c : counts) p.exceedances += c[i];
    p.empirical = static_cast<double>(p.exceedances) / static_cast<double>(replicas);
    p.upper_confidence = p.exceedances == replicas
                             ? 1.0
                             : boost::math::binomial_distribution<>::find_upper_bound_on_p(
                                   static_cast<double>(replicas), static_cast<double>(p.exceedances), 0.01);
    p.holds = p.upper_confidence <= p.bound;
    report.pass = report.pass && p.holds;
  }
  return report;
}

}  // namespace grw
