#include "grw/measures.hpp"

#include "grw/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace grw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Power series of 0F1(; k/2; s^2/4) and its first two derivatives.
SphereMgf series_mgf(int k, double s) {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  double a = 1.0;  // a_j = 1 / (4^j j! (k/2)_j)
  const double half_k = 0.5 * k;
  for (int j = 0; j < 40; ++j) {
    const double s2j = std::pow(s, 2 * j);
    m0 += a * s2j;
    if (j >= 1) m1 += 2.0 * j * a * std::pow(s, 2 * j - 1);
    if (j >= 1) m2 += 2.0 * j * (2.0 * j - 1.0) * a * std::pow(s, 2 * j - 2);
    a /= 4.0 * (j + 1) * (half_k + j);
  }
  return {std::log(m0), m1 / m0, m2 / m0};
}

double log_bessel_i(double nu, double s) {
  if (s <= 600.0) return std::log(boost::math::cyl_bessel_i(nu, s));
  // Hankel expansion for large argument.
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int j = 1; j <= 10; ++j) {
    term *= -(mu - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (8.0 * j * s);
    sum += term;
  }
  return s - 0.5 * std::log(2.0 * std::numbers::pi * s) + std::log(sum);
}

double log_sum_exp(const std::vector<double>& xs) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

// Radial integral over a norm density: returns (f, f', f'') at q.
template <class LogDensity>
RadialProfile integrate_profile(int k, double q, double lo, double hi, LogDensity log_density, double shift) {
  using boost::math::quadrature::gauss_kronrod;
  auto weight = [&](double rho, const SphereMgf& mg) { return std::exp(log_density(rho) + mg.log_value - shift); };
  auto z0 = [&](double rho) { return weight(rho, sphere_direction_mgf(k, rho * q)); };
  auto z1 = [&](double rho) {
    const SphereMgf mg = sphere_direction_mgf(k, rho * q);
    return weight(rho, mg) * rho * mg.ratio;
  };
  auto z2 = [&](double rho) {
    const SphereMgf mg = sphere_direction_mgf(k, rho * q);
    return weight(rho, mg) * rho * rho * mg.ratio2;
  };
  constexpr unsigned kDepth = 15;
  constexpr double kTol = 1e-13;
  const double i0 = gauss_kronrod<double, 31>::integrate(z0, lo, hi, kDepth, kTol);
  const double i1 = gauss_kronrod<double, 31>::integrate(z1, lo, hi, kDepth, kTol);
  const double i2 = gauss_kronrod<double, 31>::integrate(z2, lo, hi, kDepth, kTol);
  const double slope = i1 / i0;
  return {shift + std::log(i0), slope, i2 / i0 - slope * slope};
}

}  // namespace

SphereMgf sphere_direction_mgf(int k, double s) {
  s = std::abs(s);
  if (s < 2.0) return series_mgf(k, s);
  if (k == 1) {
    const double e = std::exp(-2.0 * s);
    return {s + std::log1p(e) - std::log(2.0), (1.0 - e) / (1.0 + e), 1.0};
  }
  if (k == 3) {
    const double e = std::exp(-2.0 * s);
    const double coth = (1.0 + e) / (1.0 - e);
    const double ratio = coth - 1.0 / s;
    return {s + std::log1p(-e) - std::log(2.0 * s), ratio, 1.0 - 2.0 * ratio / s};
  }
  const double nu = 0.5 * k - 1.0;
  const double log_i = log_bessel_i(nu, s);
  const double log_m = std::lgamma(0.5 * k) + nu * std::log(2.0 / s) + log_i;
  const double ratio = std::exp(log_bessel_i(nu + 1.0, s) - log_i);
  return {log_m, ratio, 1.0 - (k - 1.0) * ratio / s};
}

NormLaw NormLaw::discrete(std::vector<double> radii, std::vector<double> weights) {
  if (radii.empty() || radii.size() != weights.size())
    throw DomainError("discrete norm law needs matching, non-empty radii and weights");
  double total = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0.0) || !std::isfinite(radii[i])) throw DomainError("norm law radii must be finite and >= 0");
    if (!(weights[i] >= 0.0)) throw DomainError("norm law weights must be >= 0");
    total += weights[i];
  }
  if (!(total > 0.0)) throw DomainError("norm law weights must have positive total");
  for (double& w : weights) w /= total;
  NormLaw law;
  law.kind = Kind::Discrete;
  law.radii = std::move(radii);
  law.weights = std::move(weights);
  return law;
}

NormLaw NormLaw::half_normal(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("half-normal scale must be > 0");
  NormLaw law;
  law.kind = Kind::HalfNormal;
  law.sigma = sigma;
  return law;
}

double NormLaw::max_radius() const {
  if (kind == Kind::HalfNormal) return kInf;
  double mx = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (weights[i] > 0.0) mx = std::max(mx, radii[i]);
  return mx;
}

MeasureFamily MeasureFamily::gaussian(const Manifold& m) { return MeasureFamily(FamilyKind::IsotropicGaussian, m); }

MeasureFamily MeasureFamily::uniform_ball(const Manifold& m, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("uniform ball radius must be > 0");
  MeasureFamily f(FamilyKind::UniformBall, m);
  f.ball_radius_ = radius;
  return f;
}

MeasureFamily MeasureFamily::radial_norm(const Manifold& m, NormLaw law) {
  MeasureFamily f(FamilyKind::RadialNorm, m);
  f.law_ = std::move(law);
  return f;
}

double MeasureFamily::mean_range_radius() const {
  switch (kind_) {
    case FamilyKind::IsotropicGaussian:
      return kInf;
    case FamilyKind::UniformBall:
      return ball_radius_;
    case FamilyKind::RadialNorm:
      return law_.max_radius();
  }
  return kInf;
}

std::string MeasureFamily::name() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case FamilyKind::IsotropicGaussian:
      os << "gaussian";
      break;
    case FamilyKind::UniformBall:
      os << "ball:" << ball_radius_;
      break;
    case FamilyKind::RadialNorm:
      if (law_.kind == NormLaw::Kind::HalfNormal) {
        os << "radial:halfnormal:" << law_.sigma;
      } else {
        os << "radial:";
        for (std::size_t i = 0; i < law_.radii.size(); ++i)
          os << (i ? "," : "") << law_.radii[i] << "@" << law_.weights[i];
      }
      break;
  }
  return os.str();
}

RadialProfile MeasureFamily::profile(double q) const {
  q = std::abs(q);
  RadialProfile out = evaluate_profile(q);
  // A probability measure has Lambda(0) = 0 and, centered, zero slope there.
  if (q == 0.0) out.value = out.slope = 0.0;
  return out;
}

RadialProfile MeasureFamily::evaluate_profile(double q) const {
  const int k = manifold_.dim();
  switch (kind_) {
    case FamilyKind::IsotropicGaussian:
      return {0.5 * q * q, q, 1.0};

    case FamilyKind::UniformBall: {
      const double r = ball_radius_;
      if (k == 1) {
        // log(sinh(rq) / (rq)) is the direction mgf of S^2 at rq.
        const SphereMgf mg = sphere_direction_mgf(3, r * q);
        const double slope = r * mg.ratio;
        return {mg.log_value, slope, r * r * mg.ratio2 - slope * slope};
      }
      const double log_norm = std::log(static_cast<double>(k)) - k * std::log(r);
      auto log_density = [&](double rho) { return log_norm + (k - 1) * std::log(rho); };
      return integrate_profile(k, q, 0.0, r, log_density, sphere_direction_mgf(k, r * q).log_value);
    }

    case FamilyKind::RadialNorm: {
      if (law_.kind == NormLaw::Kind::HalfNormal) {
        const double sg = law_.sigma;
        const double log_norm = std::log(2.0) - std::log(sg) - 0.5 * std::log(2.0 * std::numbers::pi);
        auto log_density = [&](double rho) { return log_norm - rho * rho / (2.0 * sg * sg); };
        const double hi = sg * sg * q + 40.0 * sg;
        return integrate_profile(k, q, 0.0, hi, log_density, 0.5 * sg * sg * q * q);
      }
      std::vector<double> logs;
      std::vector<SphereMgf> mgs;
      for (std::size_t i = 0; i < law_.radii.size(); ++i) {
        if (law_.weights[i] <= 0.0) continue;
        mgs.push_back(sphere_direction_mgf(k, law_.radii[i] * q));
        logs.push_back(std::log(law_.weights[i]) + mgs.back().log_value);
      }
      const double f = log_sum_exp(logs);
      double slope = 0.0, second = 0.0;
      std::size_t j = 0;
      for (std::size_t i = 0; i < law_.radii.size(); ++i) {
        if (law_.weights[i] <= 0.0) continue;
        const double pi = std::exp(logs[j] - f);
        const double rho = law_.radii[i];
        slope += pi * rho * mgs[j].ratio;
        second += pi * rho * rho * mgs[j].ratio2;
        ++j;
      }
      return {f, slope, second - slope * slope};
    }
  }
  return {0.0, 0.0, 0.0};
}

TangentVector standard_tangent_normal(const Manifold& m, const Point& x, CounterStream& rng) {
  switch (m.kind()) {
    case ManifoldKind::Euclidean: {
      Vec v(m.dim());
      for (int i = 0; i < m.dim(); ++i) v[i] = rng.normal();
      return {x, v};
    }
    case ManifoldKind::Sphere: {
      // Ambient N(0, I) projected onto the tangent plane.
      Vec g(m.ambient_dim());
      for (int i = 0; i < m.ambient_dim(); ++i) g[i] = rng.normal();
      return {x, project_tangent(m, x, g)};
    }
    case ManifoldKind::Hyperbolic2: {
      Vec v(2);
      v[0] = rng.normal();
      v[1] = rng.normal();
      return {x, x[1] * v};
    }
  }
  return {x, Vec::Zero(m.ambient_dim())};
}

namespace {

TangentVector uniform_direction(const Manifold& m, const Point& x, CounterStream& rng) {
  for (;;) {
    TangentVector v = standard_tangent_normal(m, x, rng);
    const double n = norm(m, v);
    if (n > 0.0) {
      v.components /= n;
      return v;
    }
  }
}

double sample_norm(const NormLaw& law, CounterStream& rng) {
  if (law.kind == NormLaw::Kind::HalfNormal) return law.sigma * std::abs(rng.normal());
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < law.radii.size(); ++i) {
    acc += law.weights[i];
    if (u < acc) return law.radii[i];
  }
  return law.radii.back();
}

}  // namespace

TangentVector sample_increment(const MeasureFamily& fam, const Point& x, CounterStream& rng) {
  const Manifold& m = fam.manifold();
  switch (fam.kind()) {
    case FamilyKind::IsotropicGaussian:
      return standard_tangent_normal(m, x, rng);
    case FamilyKind::UniformBall: {
      TangentVector v = uniform_direction(m, x, rng);
      v.components *= fam.ball_radius() * std::pow(rng.uniform(), 1.0 / m.dim());
      return v;
    }
    case FamilyKind::RadialNorm: {
      TangentVector v = uniform_direction(m, x, rng);
      v.components *= sample_norm(fam.norm_law(), rng);
      return v;
    }
  }
  return {x, Vec::Zero(m.ambient_dim())};
}

double log_mgf(const MeasureFamily& fam, const CotangentVector& p) {
  const double value = fam.profile(norm(fam.manifold(), p)).value;
  if (!std::isfinite(value)) throw DomainError("log_mgf is not finite: inadmissible norm law");
  return value;
}

TangentVector log_mgf_gradient(const MeasureFamily& fam, const CotangentVector& p) {
  const Manifold& m = fam.manifold();
  const double q = norm(m, p);
  TangentVector sharp = raise(m, p);
  if (q == 0.0) {
    sharp.components.setZero();
    return sharp;
  }
  sharp.components *= fam.profile(q).slope / q;
  return sharp;
}

MgfEstimate estimate_log_mgf(const MeasureFamily& fam, const CotangentVector& p, int samples, std::uint64_t seed) {
  if (samples < 2) throw DomainError("estimate_log_mgf needs at least two samples");
  std::vector<double> e(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    CounterStream rng(seed, static_cast<std::uint64_t>(i));
    e[static_cast<std::size_t>(i)] = pairing(p, sample_increment(fam, p.base, rng));
  }
  const double shift = *std::max_element(e.begin(), e.end());
  double s1 = 0.0, s2 = 0.0;
  for (double x : e) {
    const double w = std::exp(x - shift);
    s1 += w;
    s2 += w * w;
  }
  const double mean = s1 / samples;
  const double var = std::max(0.0, s2 / samples - mean * mean) * samples / (samples - 1.0);
  return {shift + std::log(mean), std::sqrt(var / samples) / mean};
}

ConjugateResult legendre(const MeasureFamily& fam, const TangentVector& v, const LegendreOptions& opts) {
  const Manifold& m = fam.manifold();
  const double s = norm(m, v);
  ConjugateResult out;
  out.argmax_p = lower(m, v);
  out.argmax_p.components.setZero();
  if (s == 0.0) return out;

  const Vec unit_flat = lower(m, v).components / s;
  const double smax = fam.mean_range_radius();

  if (s > smax * (1.0 + 1e-12)) {
    out.value = kOutOfDomainSentinel;
    out.attained = false;
    out.out_of_domain = true;
    return out;
  }

  if (s >= smax * (1.0 - 1e-12)) {
    // Boundary of the mean range: the supremum is approached as |p| -> inf.
    out.attained = false;
    double prev = -kInf;
    double q = 1.0;
    for (int it = 0; it < 80; ++it, q *= 2.0) {
      const double g = q * s - fam.profile(q).value;
      out.iterations = it + 1;
      if (std::isfinite(prev) && std::abs(g - prev) < opts.tolerance) {
        out.value = g;
        out.argmax_p.components = q * unit_flat;
        return out;
      }
      prev = g;
    }
    out.value = kOutOfDomainSentinel;
    out.out_of_domain = true;
    return out;
  }

  // Bracket the root of f'(q) = s.
  double lo = 0.0, hi = std::max(1.0, s);
  while (fam.profile(hi).slope < s) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NonConvergence("legendre: failed to bracket the maximizer", 0, s);
  }

  const RadialProfile at0 = fam.profile(0.0);
  double q = std::clamp(s / std::max(at0.curvature, 1e-300), lo, hi);
  RadialProfile pr = fam.profile(q);
  double residual = std::abs(pr.slope - s);
  int it = 0;
  while (residual > opts.tolerance * std::max(1.0, s)) {
    if (++it > opts.max_iterations)
      throw NonConvergence("legendre: Newton iteration did not converge", it - 1, residual);
    if (pr.slope < s) {
      lo = std::max(lo, q);
    } else {
      hi = std::min(hi, q);
    }
    double next = q - (pr.slope - s) / pr.curvature;
    if (!(pr.curvature > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    q = next;
    pr = fam.profile(q);
    residual = std::abs(pr.slope - s);
  }
  out.value = q * s - pr.value;
  out.argmax_p.components = q * unit_flat;
  out.iterations = it;
  out.residual = residual;
  return out;
}

}  // namespace grw
