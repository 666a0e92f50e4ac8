#include "grw/errors.hpp"
#include "grw/measures.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace grw {
namespace {

using testing::kPi;

// Composite Simpson rule on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// log E exp(q <e, V>) for V uniform in the Euclidean k-ball of radius r. With
// x = r cos(theta) along e the slice volume gives the weight sin^k(theta).
double ball_log_mgf_oracle(int k, double r, double q) {
  auto w = [&](double t) { return std::pow(std::sin(t), k); };
  const double num = simpson([&](double t) { return std::exp(q * r * std::cos(t)) * w(t); }, 0.0, kPi);
  return std::log(num / simpson(w, 0.0, kPi));
}

// log E exp(s u_1) for u uniform on S^{k-1}, via the density of u_1.
double direction_log_mgf_oracle(int k, double s) {
  if (k == 1) return std::log(std::cosh(s));
  if (k == 3) return s < 1e-8 ? 0.0 : std::log(std::sinh(s) / s);
  auto w = [&](double t) { return std::pow(std::sin(t), k - 2); };
  const double num = simpson([&](double t) { return std::exp(s * std::cos(t)) * w(t); }, 0.0, kPi);
  return std::log(num / simpson(w, 0.0, kPi));
}

std::vector<MeasureFamily> families_on(const Manifold& m) {
  return {MeasureFamily::gaussian(m), MeasureFamily::uniform_ball(m, 1.3),
          MeasureFamily::radial_norm(m, NormLaw::discrete({0.5, 1.0, 2.0}, {1.0, 2.0, 1.0})),
          MeasureFamily::radial_norm(m, NormLaw::half_normal(0.8))};
}

TEST(SphereMgf, MatchesQuadrature) {
  for (int k : {1, 2, 3, 4, 5}) {
    for (double s : {0.0, 1e-3, 0.5, 1.7, 6.0, 25.0}) {
      const SphereMgf g = sphere_direction_mgf(k, s);
      EXPECT_NEAR(g.log_value, direction_log_mgf_oracle(k, s), 1e-9 * std::max(1.0, s)) << k << " " << s;
    }
  }
  // Ratio against a central difference of the log value.
  for (int k : {2, 3, 4}) {
    for (double s : {0.3, 2.0, 40.0, 900.0}) {
      const double h = 1e-5 * std::max(1.0, s);
      const double fd = (sphere_direction_mgf(k, s + h).log_value - sphere_direction_mgf(k, s - h).log_value) / (2 * h);
      EXPECT_NEAR(sphere_direction_mgf(k, s).ratio, fd, 1e-7) << k << " " << s;
    }
  }
}

TEST(LogMgf, Examples) {
  const Manifold e1 = Manifold::euclidean(1);
  const Point x{0.0};
  EXPECT_NEAR(log_mgf(MeasureFamily::uniform_ball(e1, 1.0), {x, Vec::Ones(1)}), std::log(std::sinh(1.0)), 1e-12);
  EXPECT_NEAR(std::log(std::sinh(1.0)), 0.16144, 1e-5);
  for (const Manifold& m : testing::all_manifolds())
    for (const auto& fam : families_on(m)) EXPECT_EQ(log_mgf(fam, {origin(m), Vec::Zero(m.ambient_dim())}), 0.0);

  const Manifold h = Manifold::hyperbolic2();
  const Point y{0.5, 2.0};
  const CotangentVector p{y, Vec(Point{1.0, -3.0}.coords)};
  EXPECT_NEAR(log_mgf(MeasureFamily::gaussian(h), p), 0.5 * norm(h, p) * norm(h, p), 1e-12);
}

TEST(LogMgf, UniformBallMatchesSliceIntegral) {
  for (int k : {1, 2, 3}) {
    const Manifold m = Manifold::euclidean(k);
    for (double r : {0.5, 1.0, 2.0}) {
      const MeasureFamily fam = MeasureFamily::uniform_ball(m, r);
      for (double q : {0.1, 1.0, 3.0, 10.0}) {
        EXPECT_NEAR(fam.profile(q).value, ball_log_mgf_oracle(k, r, q), 1e-8 * std::max(1.0, q * r))
            << k << " " << r << " " << q;
      }
    }
  }
}

TEST(LogMgf, DiscreteNormLawMatchesMixture) {
  const Manifold m = Manifold::sphere(1.0);  // k = 2
  const MeasureFamily fam = MeasureFamily::radial_norm(m, NormLaw::discrete({0.5, 1.5}, {0.25, 0.75}));
  for (double q : {0.2, 1.0, 4.0}) {
    const double expect = std::log(0.25 * std::exp(direction_log_mgf_oracle(2, 0.5 * q)) +
                                   0.75 * std::exp(direction_log_mgf_oracle(2, 1.5 * q)));
    EXPECT_NEAR(fam.profile(q).value, expect, 1e-9);
  }
}

TEST(LogMgf, HalfNormalMatchesQuadrature) {
  const Manifold m = Manifold::euclidean(3);
  const double sigma = 0.8;
  const MeasureFamily fam = MeasureFamily::radial_norm(m, NormLaw::half_normal(sigma));
  for (double q : {0.3, 1.0, 2.5}) {
    auto dens = [&](double rho) {
      return std::sqrt(2.0 / kPi) / sigma * std::exp(-rho * rho / (2 * sigma * sigma)) *
             std::exp(direction_log_mgf_oracle(3, q * rho));
    };
    EXPECT_NEAR(fam.profile(q).value, std::log(simpson(dens, 0.0, 12.0 * sigma, 20000)), 1e-9);
  }
}

TEST(LogMgf, GradientMatchesCentralDifferences) {
  CounterStream rng(30, 0);
  for (const Manifold& m : testing::all_manifolds()) {
    for (const auto& fam : families_on(m)) {
      for (int i = 0; i < 10; ++i) {
        const Point x = testing::random_point(m, rng);
        const CotangentVector p = lower(m, testing::random_tangent(m, x, 0.2 + 2.0 * rng.uniform(), rng));
        const TangentVector g = log_mgf_gradient(fam, p);
        const TangentVector e = testing::random_tangent(m, x, 1.0, rng);
        const CotangentVector de = lower(m, e);
        const double h = 1e-5;
        CotangentVector pp = p, pm = p;
        pp.components += h * de.components;
        pm.components -= h * de.components;
        const double fd = (log_mgf(fam, pp) - log_mgf(fam, pm)) / (2 * h);
        EXPECT_NEAR(pairing(de, g), fd, 1e-6) << fam.name();
      }
    }
  }
}

TEST(LogMgf, InvariantUnderParallelTransport) {
  CounterStream rng(31, 0);
  for (const Manifold& m : testing::all_manifolds()) {
    for (const auto& fam : families_on(m)) {
      for (int i = 0; i < 10; ++i) {
        Curve c;
        Point x = testing::random_point(m, rng);
        for (int j = 0; j < 5; ++j) {
          c.times.push_back(j);
          c.points.push_back(x);
          x = exp_map(m, testing::random_tangent(m, x, 0.4, rng));
        }
        const CotangentVector p = lower(m, testing::random_tangent(m, c.points[0], 1.5 * rng.uniform(), rng));
        const CotangentVector tp = parallel_transport(m, c, p);
        EXPECT_NEAR(log_mgf(fam, p), log_mgf(fam, tp), 1e-8);
      }
    }
  }
}

TEST(LogMgf, MonteCarloAgreesWithQuadrature) {
  for (const Manifold& m : {Manifold::euclidean(2), Manifold::sphere(1.0), Manifold::hyperbolic2()}) {
    int seed = 0;
    for (const auto& fam : families_on(m)) {
      const Point x = m.kind() == ManifoldKind::Hyperbolic2 ? Point{0.2, 1.7} : origin(m);
      const Mat e = orthonormal_frame(m, x);
      const CotangentVector p = lower(m, {x, 0.7 * e.col(0) - 0.4 * e.col(1)});
      const MgfEstimate est = estimate_log_mgf(fam, p, 100000, static_cast<std::uint64_t>(++seed));
      EXPECT_LT(std::abs(est.value - log_mgf(fam, p)), 3.0 * est.standard_error + 1e-12) << fam.name();
    }
  }
}

TEST(Sampling, BallSamplesStayInBall) {
  CounterStream rng(32, 0);
  for (const Manifold& m : testing::all_manifolds()) {
    const MeasureFamily fam = MeasureFamily::uniform_ball(m, 0.7);
    for (int i = 0; i < 2000; ++i) {
      const Point x = testing::random_point(m, rng);
      const TangentVector v = sample_increment(fam, x, rng);
      EXPECT_LE(norm(m, v), 0.7 + 1e-12);
      EXPECT_LT((project_tangent(m, x, v.components) - v.components).norm(), 1e-10);
    }
  }
}

TEST(Sampling, GaussianOnSphereHasIdentityCovariance) {
  const Manifold s = Manifold::sphere(1.0);
  const MeasureFamily fam = MeasureFamily::gaussian(s);
  const Point x{0.6, 0.0, 0.8};
  const Mat e = orthonormal_frame(s, x);
  const int n = 100000;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    CounterStream rng(33, static_cast<std::uint64_t>(i));
    const Vec c = e.transpose() * sample_increment(fam, x, rng).components;
    mean += c;
    cov += c * c.transpose();
  }
  mean /= n;
  cov /= n;
  // Var of a sample variance is 2/n, of a sample covariance 1/n.
  EXPECT_NEAR(cov(0, 0), 1.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(cov(1, 1), 1.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(cov(0, 1), 0.0, 3.0 * std::sqrt(1.0 / n));
  EXPECT_NEAR(mean[0], 0.0, 3.0 / std::sqrt(n));
  EXPECT_NEAR(mean[1], 0.0, 3.0 / std::sqrt(n));
}

TEST(Sampling, AllFamiliesCentered) {
  for (const Manifold& m : {Manifold::euclidean(2), Manifold::hyperbolic2()}) {
    int tag = 0;
    for (const auto& fam : families_on(m)) {
      const Point x = origin(m);
      const int n = 50000;
      Vec mean = Vec::Zero(m.ambient_dim()), sq = Vec::Zero(m.ambient_dim());
      for (int i = 0; i < n; ++i) {
        CounterStream rng(34 + static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(i));
        const Vec c = sample_increment(fam, x, rng).components;
        mean += c;
        sq += c.cwiseProduct(c);
      }
      mean /= n;
      sq /= n;
      for (Eigen::Index d = 0; d < mean.size(); ++d) EXPECT_NEAR(mean[d], 0.0, 3.0 * std::sqrt(sq[d] / n));
      ++tag;
    }
  }
}

TEST(Legendre, Examples) {
  const Manifold e1 = Manifold::euclidean(1);
  const MeasureFamily logcosh = MeasureFamily::radial_norm(e1, NormLaw::discrete({1.0}, {1.0}));
  const ConjugateResult r = legendre(logcosh, {Point{0.0}, Vec::Constant(1, 0.5)});
  const double expect = 0.5 * (1.5 * std::log(1.5) + 0.5 * std::log(0.5));
  EXPECT_NEAR(r.value, expect, 1e-10);
  EXPECT_NEAR(r.value, 0.13081, 1e-5);
  EXPECT_TRUE(r.attained);
  EXPECT_LT(r.residual, 1e-8);

  for (const Manifold& m : testing::all_manifolds())
    for (const auto& fam : families_on(m)) {
      const ConjugateResult z = legendre(fam, {origin(m), Vec::Zero(m.ambient_dim())});
      EXPECT_EQ(z.value, 0.0);
    }
}

TEST(Legendre, GaussianIsHalfSquaredNorm) {
  CounterStream rng(35, 0);
  for (const Manifold& m : testing::all_manifolds()) {
    const MeasureFamily fam = MeasureFamily::gaussian(m);
    for (int i = 0; i < 50; ++i) {
      const Point x = testing::random_point(m, rng);
      const TangentVector v = testing::random_tangent(m, x, 5.0 * rng.uniform(), rng);
      const double s = norm(m, v);
      EXPECT_NEAR(legendre(fam, v).value, 0.5 * s * s, 1e-10);
    }
  }
}

TEST(Legendre, FenchelYoung) {
  CounterStream rng(36, 0);
  for (const Manifold& m : {Manifold::euclidean(1), Manifold::sphere(1.0), Manifold::hyperbolic2()}) {
    for (const auto& fam : families_on(m)) {
      for (int i = 0; i < 100; ++i) {
        const Point x = testing::random_point(m, rng);
        const CotangentVector p = lower(m, testing::random_tangent(m, x, 3.0 * rng.uniform(), rng));
        const TangentVector dual = log_mgf_gradient(fam, p);
        const ConjugateResult at_dual = legendre(fam, dual);
        EXPECT_NEAR(log_mgf(fam, p) + at_dual.value, pairing(p, dual), 1e-7) << fam.name();

        const double reach = std::min(fam.mean_range_radius() * 0.999, 4.0);
        const TangentVector v = testing::random_tangent(m, x, reach * rng.uniform(), rng);
        const ConjugateResult c = legendre(fam, v);
        EXPECT_GE(c.value, 0.0);
        EXPECT_GE(log_mgf(fam, p) + c.value, pairing(p, v) - 1e-9);
      }
    }
  }
}

TEST(Legendre, OutsideMeanRange) {
  const Manifold e2 = Manifold::euclidean(2);
  const MeasureFamily ball = MeasureFamily::uniform_ball(e2, 1.0);
  const ConjugateResult out = legendre(ball, {Point{0.0, 0.0}, Vec(Point{1.0, 0.5}.coords)});
  EXPECT_TRUE(out.out_of_domain);
  EXPECT_EQ(out.value, kOutOfDomainSentinel);

  // log cosh at the edge of the mean range: finite limit log 2, not attained.
  const Manifold e1 = Manifold::euclidean(1);
  const MeasureFamily logcosh = MeasureFamily::radial_norm(e1, NormLaw::discrete({1.0}, {1.0}));
  const ConjugateResult edge = legendre(logcosh, {Point{0.0}, Vec::Ones(1)});
  EXPECT_FALSE(edge.attained);
  EXPECT_FALSE(edge.out_of_domain);
  EXPECT_NEAR(edge.value, std::log(2.0), 1e-9);

  // Uniform ball at |v| = r: the supremum diverges.
  const ConjugateResult ball_edge = legendre(ball, {Point{0.0, 0.0}, Vec::Unit(2, 0)});
  EXPECT_FALSE(ball_edge.attained);
  EXPECT_EQ(ball_edge.value, kOutOfDomainSentinel);
}

TEST(Legendre, IterationCapReportsNonConvergence) {
  const Manifold e1 = Manifold::euclidean(1);
  const MeasureFamily ball = MeasureFamily::uniform_ball(e1, 1.0);
  LegendreOptions opts;
  opts.max_iterations = 1;
  opts.tolerance = 1e-300;
  try {
    legendre(ball, {Point{0.0}, Vec::Constant(1, 0.9)}, opts);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.iterations(), 1);
    EXPECT_GT(e.residual(), 0.0);
  }
}

}  // namespace
}  // namespace grw
