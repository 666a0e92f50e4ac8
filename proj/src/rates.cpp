#include "grw/rates.hpp"

#include "grw/errors.hpp"
#include "grw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace grw {

RateModel RateModel::walk(MeasureFamily family) {
  Manifold m = family.manifold();
  return RateModel(ModelKind::Walk, std::move(m), std::move(family));
}

RateModel RateModel::brownian(const Manifold& m) { return RateModel(ModelKind::Brownian, m, std::nullopt); }

RadialProfile RateModel::profile(double q) const {
  if (kind_ == ModelKind::Brownian) return {0.5 * q * q, q, 1.0};
  return family_->profile(q);
}

double RateModel::containment_hamiltonian_bound() const { return profile(2.0).value; }

std::string RateModel::name() const {
  if (kind_ == ModelKind::Brownian) return "brownian";
  return "walk:" + family_->name();
}

double hamiltonian(const RateModel& rm, const CotangentVector& p) {
  return rm.profile(norm(rm.manifold(), p)).value;
}

TangentVector hamiltonian_gradient(const RateModel& rm, const CotangentVector& p) {
  const double q = norm(rm.manifold(), p);
  TangentVector sharp = raise(rm.manifold(), p);
  if (q == 0.0) {
    sharp.components.setZero();
    return sharp;
  }
  sharp.components *= rm.profile(q).slope / q;
  return sharp;
}

double lagrangian(const RateModel& rm, const TangentVector& v) {
  if (rm.kind() == ModelKind::Brownian) {
    const double s = norm(rm.manifold(), v);
    return 0.5 * s * s;
  }
  return legendre(rm.family(), v).value;
}

double containment_hamiltonian(const RateModel& rm, const Point& x0, const Point& x) {
  return hamiltonian(rm, containment(rm.manifold(), x0, x).differential);
}

ActionReport path_action(const RateModel& rm, const Curve& curve) {
  const Curve c = with_velocities(rm.manifold(), curve);
  ActionReport out;
  std::vector<double> integrand;
  std::vector<bool> outside;
  integrand.reserve(c.points.size());
  for (const auto& v : c.velocities) {
    const double l = lagrangian(rm, v);
    integrand.push_back(l);
    outside.push_back(l >= kOutOfDomainSentinel);
  }
  for (std::size_t j = 0; j + 1 < c.points.size(); ++j) {
    const double seg = 0.5 * (integrand[j] + integrand[j + 1]) * (c.times[j + 1] - c.times[j]);
    out.per_segment.push_back(seg);
    out.value += seg;
    if (outside[j] || outside[j + 1]) out.flags.push_back(j);
  }
  return out;
}

CramerResult cramer_rate(const RateModel& rm, const Point& x0, const Point& x, int max_geodesics) {
  const GeodesicSolutions sols = geodesic_bvp(rm.manifold(), x0, x, max_geodesics);
  CramerResult best;
  best.rate = std::numeric_limits<double>::infinity();
  best.degenerate = sols.degenerate;
  for (const auto& v : sols.velocities) {
    const double l = lagrangian(rm, v);
    if (l < best.rate) {
      best.rate = l;
      best.geodesic_speed = norm(rm.manifold(), v);
    }
  }
  return best;
}

CotangentVector differential(const Manifold& m, const TerminalFunction& f, const Point& x, double h) {
  if (f.gradient) return f.gradient(x);
  const Mat e = orthonormal_frame(m, x);
  Vec sharp = Vec::Zero(m.ambient_dim());
  for (Eigen::Index i = 0; i < e.cols(); ++i) {
    const double fp = f.value(exp_map(m, {x, h * e.col(i)}));
    const double fm = f.value(exp_map(m, {x, -h * e.col(i)}));
    sharp += ((fp - fm) / (2.0 * h)) * e.col(i);
  }
  return lower(m, {x, sharp});
}

namespace {

// Piecewise-geodesic paths parametrized by frame coordinates of each segment's
// displacement; the frame is carried along by parallel transport, so the
// coordinates are the anti-development increments of the path.
class ShootingProblem {
 public:
  ShootingProblem(const RateModel& rm, const TerminalFunction& f, const Point& x, double t, int segments)
      : rm_(rm), f_(f), x_(x), frame0_(orthonormal_frame(rm.manifold(), x)), n_(segments), dt_(t / segments),
        k_(rm.manifold().dim()) {}

  Eigen::Index size() const { return static_cast<Eigen::Index>(n_) * k_; }
  double step() const { return dt_; }

  double objective(const Vec& xi, std::vector<Point>* points = nullptr) const {
    const Manifold& m = rm_.manifold();
    Point y = x_;
    Mat frame = frame0_;
    double cost = 0.0;
    if (points) points->push_back(y);
    for (int j = 0; j < n_; ++j) {
      const Vec u = frame * xi.segment(static_cast<Eigen::Index>(j) * k_, k_);
      cost += dt_ * lagrangian(rm_, {y, u / dt_});
      const TangentVector move{y, u};
      if (j + 1 < n_) {
        for (Eigen::Index c = 0; c < frame.cols(); ++c)
          frame.col(c) = transport_along_geodesic(m, move, frame.col(c)).components;
      }
      y = exp_map(m, move);
      if (points) points->push_back(y);
    }
    return f_.value(y) - cost;
  }

  Vec gradient(const Vec& xi) const {
    Vec g(xi.size());
    Vec probe = xi;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(xi[i]));
      probe[i] = xi[i] + h;
      const double up = objective(probe);
      probe[i] = xi[i] - h;
      const double down = objective(probe);
      probe[i] = xi[i];
      g[i] = (up - down) / (2.0 * h);
    }
    return g;
  }

 private:
  const RateModel& rm_;
  const TerminalFunction& f_;
  Point x_;
  Mat frame0_;
  int n_;
  double dt_;
  int k_;
};

struct AscentResult {
  Vec xi;
  double value;
  bool converged;
};

// Gradient ascent with Barzilai-Borwein step lengths and Armijo backtracking.
AscentResult ascend(const ShootingProblem& prob, Vec xi, const SemigroupOptions& opts) {
  double value = prob.objective(xi);
  Vec g = prob.gradient(xi);
  double alpha = prob.step();
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double gg = g.squaredNorm();
    if (std::sqrt(gg) < opts.gradient_tolerance) return {xi, value, true};
    Vec next;
    double next_value = value;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      next = xi + alpha * g;
      next_value = prob.objective(next);
      if (next_value >= value + 1e-4 * alpha * gg) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return {xi, value, false};
    const Vec g_next = prob.gradient(next);
    const Vec s = next - xi;
    const double curvature = -s.dot(g_next - g);
    alpha = curvature > 0.0 ? s.squaredNorm() / curvature : 2.0 * alpha;
    xi = std::move(next);
    value = next_value;
    g = g_next;
  }
  return {xi, value, g.norm() < opts.gradient_tolerance};
}

}  // namespace

SemigroupResult variational_semigroup(const RateModel& rm, const TerminalFunction& f, double t, const Point& x,
                                      int segments, const SemigroupOptions& opts) {
  if (!(t > 0.0)) throw DomainError("variational_semigroup: t must be > 0");
  if (segments < 1) throw DomainError("variational_semigroup: segments must be >= 1");
  if (opts.starts < 1) throw DomainError("variational_semigroup: need at least one start");
  validate_point(rm.manifold(), x);

  const ShootingProblem prob(rm, f, x, t, segments);
  const int k = rm.manifold().dim();

  std::vector<Vec> starts;
  starts.push_back(Vec::Zero(prob.size()));
  for (int s = 1; s < opts.starts; ++s) {
    CounterStream rng(opts.seed, static_cast<std::uint64_t>(s));
    Vec w(k);
    for (int i = 0; i < k; ++i) w[i] = std::sqrt(t) * (0.5 + 0.25 * s) * rng.normal();
    Vec xi(prob.size());
    for (int j = 0; j < segments; ++j) xi.segment(static_cast<Eigen::Index>(j) * k, k) = w / segments;
    starts.push_back(std::move(xi));
  }

  std::vector<AscentResult> results(starts.size());
  const int workers = std::clamp(opts.threads, 1, static_cast<int>(starts.size()));
  auto run = [&](int worker) {
    for (std::size_t s = static_cast<std::size_t>(worker); s < starts.size(); s += workers)
      results[s] = ascend(prob, starts[s], opts);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }

  // Deterministic argmax: ties go to the lowest start index.
  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s)
    if (results[s].value > results[best].value) best = s;

  SemigroupResult out;
  out.value = results[best].value;
  out.converged = results[best].converged;
  out.best_start = static_cast<int>(best);
  prob.objective(results[best].xi, &out.path.points);
  for (int j = 0; j <= segments; ++j) out.path.times.push_back(t * j / segments);
  return out;
}

Curve characteristic_flow(const RateModel& rm, const TerminalFunction& f, const Point& x0, double horizon,
                          double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw DomainError("characteristic_flow: need dt > 0 and horizon >= 0");
  const Manifold& m = rm.manifold();
  validate_point(m, x0);

  auto field = [&](const Point& y) {
    TangentVector q = hamiltonian_gradient(rm, differential(m, f, y));
    if (!q.components.allFinite() || norm(m, q) > 1e12)
      throw StepSizeFailure("characteristic_flow: velocity field diverged");
    return q;
  };
  // Stage velocity at exp_x(w), transported back to x along the same geodesic.
  auto stage = [&](const Point& x, const Vec& w) {
    const Point y = exp_map(m, {x, w});
    const TangentVector q = field(y);
    const TangentVector back = log_map(m, y, x);
    return transport_along_geodesic(m, back, q.components).components;
  };

  const std::size_t steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  Curve c;
  Point x = x0;
  for (std::size_t i = 0;; ++i) {
    const TangentVector k1 = field(x);
    c.times.push_back(i * dt);
    c.points.push_back(x);
    c.velocities.push_back(k1);
    if (i == steps) break;
    const Vec k2 = stage(x, 0.5 * dt * k1.components);
    const Vec k3 = stage(x, 0.5 * dt * k2);
    const Vec k4 = stage(x, dt * k3);
    const Vec incr = (dt / 6.0) * (k1.components + 2.0 * k2 + 2.0 * k3 + k4);
    x = exp_map(m, {x, incr});
  }
  return c;
}

}  // namespace grw
