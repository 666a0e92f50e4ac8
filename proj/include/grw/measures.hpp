#pragma once

// Families {mu_x} of centered tangent-space measures that depend on a vector
// only through its g(x)-norm and a uniform direction. For such families the log
// moment generating function is Lambda_x(p) = f(|p|_g) with one radial profile
// f shared by every base point, so parallel transport leaves them invariant.

#include "grw/geometry.hpp"
#include "grw/rng.hpp"

#include <string>
#include <vector>

namespace grw {

enum class FamilyKind { IsotropicGaussian, UniformBall, RadialNorm };

// Law of the norm |V|_g for RadialNorm families.
struct NormLaw {
  enum class Kind { Discrete, HalfNormal };
  Kind kind = Kind::Discrete;
  std::vector<double> radii;    // Discrete atoms
  std::vector<double> weights;  // normalized to sum 1
  double sigma = 1.0;           // HalfNormal scale

  static NormLaw discrete(std::vector<double> radii, std::vector<double> weights);
  static NormLaw half_normal(double sigma);
  // Largest attainable norm; +inf when unbounded.
  double max_radius() const;
};

// Value, slope and curvature of the radial profile f at q = |p|_g.
struct RadialProfile {
  double value;
  double slope;
  double curvature;
};

class MeasureFamily {
 public:
  static MeasureFamily gaussian(const Manifold& m);
  static MeasureFamily uniform_ball(const Manifold& m, double radius);
  static MeasureFamily radial_norm(const Manifold& m, NormLaw law);

  FamilyKind kind() const { return kind_; }
  const Manifold& manifold() const { return manifold_; }
  double ball_radius() const { return ball_radius_; }
  const NormLaw& norm_law() const { return law_; }

  RadialProfile profile(double q) const;
  // Supremum of |grad Lambda|_g, i.e. the radius of the mean range; +inf if unbounded.
  double mean_range_radius() const;
  std::string name() const;

 private:
  MeasureFamily(FamilyKind kind, Manifold m) : kind_(kind), manifold_(std::move(m)) {}
  RadialProfile evaluate_profile(double q) const;

  FamilyKind kind_;
  Manifold manifold_;
  double ball_radius_ = 0.0;
  NormLaw law_;
};

// E[exp(s <u, e>)] for u uniform on the unit sphere S^{k-1} and a unit vector e,
// together with its first two derivatives divided by the value.
struct SphereMgf {
  double log_value;
  double ratio;   // M'/M
  double ratio2;  // M''/M
};
SphereMgf sphere_direction_mgf(int k, double s);

// A standard normal tangent vector, N(0, G^-1(x)) in any frame.
TangentVector standard_tangent_normal(const Manifold& m, const Point& x, CounterStream& rng);

TangentVector sample_increment(const MeasureFamily& fam, const Point& x, CounterStream& rng);

double log_mgf(const MeasureFamily& fam, const CotangentVector& p);
// grad_p Lambda_x(p) as a tangent vector at p.base.
TangentVector log_mgf_gradient(const MeasureFamily& fam, const CotangentVector& p);

// Plain Monte Carlo estimate of Lambda_x(p) with a delta-method standard error.
struct MgfEstimate {
  double value;
  double standard_error;
};
MgfEstimate estimate_log_mgf(const MeasureFamily& fam, const CotangentVector& p, int samples, std::uint64_t seed);

inline constexpr double kOutOfDomainSentinel = 1e18;

struct LegendreOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;
};

struct ConjugateResult {
  double value = 0.0;
  CotangentVector argmax_p;
  int iterations = 0;
  double residual = 0.0;
  bool attained = true;       // the supremum is a maximum
  bool out_of_domain = false; // value is the sentinel
};

// Lambda*_x(v) = sup_p <v, p> - Lambda_x(p), reduced to a 1-D problem in |p|.
ConjugateResult legendre(const MeasureFamily& fam, const TangentVector& v, const LegendreOptions& opts = {});

}  // namespace grw
