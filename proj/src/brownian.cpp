#include "grw/brownian.hpp"

#include "grw/errors.hpp"
#include "grw/rng.hpp"

#include <cmath>
#include <iomanip>

namespace grw {

namespace {

void gram_schmidt(const Manifold& m, const Point& x, Mat& frame) {
  for (Eigen::Index i = 0; i < frame.cols(); ++i) {
    Vec c = project_tangent(m, x, frame.col(i));
    for (Eigen::Index j = 0; j < i; ++j) c -= inner(m, x, c, frame.col(j)) * frame.col(j);
    frame.col(i) = c / std::sqrt(inner(m, x, c, c));
  }
}

}  // namespace

FrameState initial_frame_state(const Manifold& m, const Point& x0) {
  validate_point(m, x0);
  return {x0, orthonormal_frame(m, x0)};
}

double orthonormality_defect(const Manifold& m, const FrameState& s) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.frame.cols(); ++i)
    for (Eigen::Index j = 0; j < s.frame.cols(); ++j) {
      const double g = inner(m, s.x, s.frame.col(i), s.frame.col(j));
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

FrameState horizontal_step(const Manifold& m, const FrameState& s, const Vec& db, double dt, double eps) {
  if (!(dt > 0.0)) throw DomainError("horizontal_step: dt must be > 0");
  if (!db.allFinite()) throw DomainError("horizontal_step: non-finite increment");
  const Vec v = std::sqrt(eps) * (s.frame * db);
  if (v.squaredNorm() == 0.0) return s;
  const TangentVector step{s.x, v};
  FrameState out;
  out.x = exp_map(m, step);
  out.frame.resize(s.frame.rows(), s.frame.cols());
  for (Eigen::Index i = 0; i < s.frame.cols(); ++i)
    out.frame.col(i) = transport_along_geodesic(m, step, s.frame.col(i)).components;
  gram_schmidt(m, out.x, out.frame);
  return out;
}

NoiseSource brownian_noise(std::uint64_t seed, std::uint64_t replica, int dim, double dt, int substeps) {
  if (substeps < 1) throw DomainError("brownian_noise: substeps must be >= 1");
  const double fine_sd = std::sqrt(dt / substeps);
  return [=](std::size_t step) {
    Vec db = Vec::Zero(dim);
    for (int j = 0; j < substeps; ++j) {
      CounterStream rng(seed, replica, static_cast<std::uint32_t>(step * substeps + j));
      for (int i = 0; i < dim; ++i) db[i] += fine_sd * rng.normal();
    }
    return db;
  };
}

std::size_t brownian_step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw DomainError("brownian: dt must be > 0");
  if (!(horizon >= 0.0)) throw DomainError("brownian: horizon must be >= 0");
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

void simulate_brownian(const Manifold& m, const Point& x0, double eps, double horizon, double dt,
                       const NoiseSource& noise,
                       const std::function<void(std::size_t, double, const FrameState&)>& observer) {
  if (!(eps >= 0.0)) throw DomainError("brownian: eps must be >= 0");
  const std::size_t steps = brownian_step_count(horizon, dt);
  FrameState s = initial_frame_state(m, x0);
  observer(0, 0.0, s);
  for (std::size_t i = 0; i < steps; ++i) {
    s = horizontal_step(m, s, noise(i), dt, eps);
    observer(i + 1, (i + 1) * dt, s);
  }
}

BrownianPath run_brownian(const Manifold& m, const Point& x0, double eps, double horizon, double dt,
                          std::uint64_t seed, std::uint64_t replica) {
  return run_brownian(m, x0, eps, horizon, dt, brownian_noise(seed, replica, m.dim(), dt));
}

BrownianPath run_brownian(const Manifold& m, const Point& x0, double eps, double horizon, double dt,
                          const NoiseSource& noise) {
  BrownianPath p{m, dt, eps, {}, {}, {}};
  auto recording = [&](std::size_t step) {
    Vec db = noise(step);
    p.driving_noise.push_back(db);
    return db;
  };
  simulate_brownian(m, x0, eps, horizon, dt, recording, [&](std::size_t, double t, const FrameState& s) {
    p.times.push_back(t);
    p.states.push_back(s);
  });
  return p;
}

std::vector<Vec> anti_development(const BrownianPath& p) {
  const Manifold& m = p.manifold;
  std::vector<Vec> out;
  out.reserve(p.states.size());
  out.push_back(Vec::Zero(m.dim()));
  for (std::size_t i = 1; i < p.states.size(); ++i) {
    const FrameState& s = p.states[i - 1];
    const Vec step = log_map(m, s.x, p.states[i].x).components;
    // Frame coordinates of the step: u^-1 V = (<V, e_j>_g)_j.
    Vec coords(m.dim());
    for (int j = 0; j < m.dim(); ++j) coords[j] = inner(m, s.x, step, s.frame.col(j));
    out.push_back(out.back() + coords);
  }
  return out;
}

std::optional<double> radial_exit_time(const BrownianPath& p, const Point& x0, double delta) {
  if (!(delta > 0.0)) throw DomainError("radial_exit_time: delta must be > 0");
  for (std::size_t i = 0; i < p.states.size(); ++i)
    if (distance(p.manifold, p.states[i].x, x0) >= delta) return p.times[i];
  return std::nullopt;
}

double exit_bound(int k, double L, double tau, double delta) {
  if (k < 1) throw DomainError("exit_bound: dimension must be >= 1");
  if (!(L >= 1.0)) throw DomainError("exit_bound: curvature constant L must be >= 1");
  if (!(tau >= 0.0)) throw DomainError("exit_bound: tau must be >= 0");
  const double threshold = std::sqrt(2.0 * k * L * tau);
  if (!(delta > threshold)) throw DomainError("exit_bound: requires delta > sqrt(2 k L tau)");
  if (tau == 0.0) return 0.0;
  const double gap = k * L * tau - 0.5 * delta * delta;
  return 2.0 * std::exp(-0.5 * gap * gap / (delta * delta * tau));
}

void write_brownian_csv(std::ostream& os, const BrownianPath& p) {
  const int dims = p.manifold.ambient_dim();
  os << "t";
  for (int d = 0; d < dims; ++d) os << ",coord_" << d;
  os << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p.states.size(); ++i) {
    os << p.times[i];
    for (int d = 0; d < dims; ++d) os << "," << p.states[i].x[d];
    os << "\n";
  }
}

Vec stratonovich_drift_correction(const MatrixField& sigma, const Vec& x, double h) {
  const Mat s0 = sigma(x);
  const Eigen::Index d = s0.rows(), mcols = s0.cols();
  Vec out = Vec::Zero(d);
  for (Eigen::Index l = 0; l < x.size(); ++l) {
    Vec xp = x, xm = x;
    xp[l] += h;
    xm[l] -= h;
    const Mat ds = (sigma(xp) - sigma(xm)) / (2.0 * h);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < mcols; ++j) out[i] += ds(i, j) * s0(l, j);
  }
  return out;
}

SdePath run_euclidean_sde(const VectorField& b, const MatrixField& sigma, double eps, const Vec& x0, double horizon,
                          double dt, SdeScheme scheme, const NoiseSource& noise) {
  if (!(eps >= 0.0)) throw DomainError("sde: eps must be >= 0");
  const std::size_t steps = brownian_step_count(horizon, dt);
  const double se = std::sqrt(eps);
  SdePath p;
  p.times.push_back(0.0);
  p.states.push_back(x0);
  Vec y = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    const Vec dw = noise(i);
    switch (scheme) {
      case SdeScheme::ItoEuler:
        y = y + b(y) * dt + se * (sigma(y) * dw);
        break;
      case SdeScheme::ItoWithCorrection:
        y = y + (b(y) + 0.5 * eps * stratonovich_drift_correction(sigma, y)) * dt + se * (sigma(y) * dw);
        break;
      case SdeScheme::StratonovichHeun: {
        const Vec b0 = b(y);
        const Mat s0 = sigma(y);
        const Vec pred = y + b0 * dt + se * (s0 * dw);
        y = y + 0.5 * (b0 + b(pred)) * dt + 0.5 * se * ((s0 + sigma(pred)) * dw);
        break;
      }
    }
    p.times.push_back((i + 1) * dt);
    p.states.push_back(y);
  }
  return p;
}

}  // namespace grw
