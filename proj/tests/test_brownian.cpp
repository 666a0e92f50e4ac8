#include "grw/brownian.hpp"
#include "grw/errors.hpp"
#include "grw/estimator.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace grw {
namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

template <class F>
Moments moments(int n, F draw) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw(i);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  return {mean, std::sqrt((s2 / n - mean * mean) / (n - 1))};
}

TEST(Brownian, ZeroIncrementKeepsState) {
  for (const Manifold& m : testing::all_manifolds()) {
    const FrameState s = initial_frame_state(m, origin(m));
    const FrameState t = horizontal_step(m, s, Vec::Zero(m.dim()), 1e-3, 1.0);
    EXPECT_EQ(t.x.coords, s.x.coords);
    EXPECT_EQ(t.frame, s.frame);
  }
}

TEST(Brownian, EuclideanStepIsTranslation) {
  const Manifold m = Manifold::euclidean(2);
  const FrameState s = initial_frame_state(m, Point{1.0, 2.0});
  Vec db(2);
  db << 0.3, -0.1;
  const FrameState t = horizontal_step(m, s, db, 1e-2, 4.0);
  EXPECT_LT((t.x.coords - (s.x.coords + 2.0 * db)).norm(), 1e-15);
  EXPECT_LT((t.frame - s.frame).norm(), 1e-15);
}

TEST(Brownian, FrameStaysOrthonormal) {
  for (const Manifold& m : {Manifold::sphere(1.0), Manifold::hyperbolic2()}) {
    double worst = 0.0;
    simulate_brownian(m, origin(m), 1.0, 10.0, 1e-3, brownian_noise(3, 0, m.dim(), 1e-3),
                      [&](std::size_t, double, const FrameState& s) {
                        worst = std::max(worst, orthonormality_defect(m, s));
                      });
    EXPECT_LT(worst, 1e-8) << m.name();
  }
}

TEST(Brownian, ZeroNoiseGivesConstantPath) {
  const Manifold m = Manifold::sphere(1.0);
  const BrownianPath p = run_brownian(m, origin(m), 0.0, 1.0, 0.1, 4);
  ASSERT_EQ(p.states.size(), 11u);
  for (const auto& s : p.states) EXPECT_EQ(s.x.coords, origin(m).coords);
}

TEST(Brownian, StepCountIsCeiling) {
  EXPECT_EQ(brownian_step_count(1.0, 0.3), 4u);
  EXPECT_EQ(brownian_step_count(1.0, 0.25), 4u);
  EXPECT_THROW(brownian_step_count(1.0, 0.0), DomainError);
}

TEST(Brownian, EuclideanMarginal) {
  const Manifold m = Manifold::euclidean(2);
  const double eps = 0.5, T = 1.0;
  const int n = 10000;
  auto coord = [&](int d) {
    return [&, d](int i) {
      const BrownianPath p = run_brownian(m, Point{1.0, -1.0}, eps, T, 0.05, 8, static_cast<std::uint64_t>(i));
      return p.states.back().x[d] - (d == 0 ? 1.0 : -1.0);
    };
  };
  for (int d = 0; d < 2; ++d) {
    const Moments mo = moments(n, coord(d));
    EXPECT_NEAR(mo.mean, 0.0, 3.0 * mo.se);
    const Moments sq = moments(n, [&](int i) {
      const double x = coord(d)(i);
      return x * x;
    });
    EXPECT_NEAR(sq.mean, eps * T, 3.0 * sq.se);
  }
}

TEST(Brownian, AntiDevelopmentRecoversNoise) {
  for (const Manifold& m : {Manifold::sphere(1.0), Manifold::hyperbolic2(), Manifold::euclidean(2)}) {
    const double eps = 0.3;
    const BrownianPath p = run_brownian(m, origin(m), eps, 0.5, 1e-3, 9);
    const auto flat = anti_development(p);
    Vec acc = Vec::Zero(m.dim());
    for (std::size_t i = 0; i < p.driving_noise.size(); ++i) {
      acc += std::sqrt(eps) * p.driving_noise[i];
      EXPECT_LT((flat[i + 1] - acc).norm(), 1e-10) << m.name();
    }
  }
}

TEST(Brownian, SmallTimeRadialMoment) {
  const double t = 1e-3, dt = 1e-4;
  const int n = 10000;
  for (const Manifold& m : {Manifold::sphere(1.0), Manifold::hyperbolic2(), Manifold::euclidean(3)}) {
    const Point x0 = origin(m);
    const Moments mo = moments(n, [&](int i) {
      const BrownianPath p = run_brownian(m, x0, 1.0, t, dt, 10, static_cast<std::uint64_t>(i));
      const double d = distance(m, p.states.back().x, x0);
      return d * d / (m.dim() * t);
    });
    EXPECT_NEAR(mo.mean, 1.0, 3.0 * mo.se) << m.name();
  }
}

TEST(Brownian, TimeChangeConsistency) {
  const Manifold m = Manifold::sphere(1.0);
  const double eps = 0.25, T = 0.8;
  const int n = 5000;
  auto sq = [&](double e, double horizon, std::uint64_t seed) {
    return moments(n, [&](int i) {
      const BrownianPath p = run_brownian(m, origin(m), e, horizon, 2e-3, seed, static_cast<std::uint64_t>(i));
      const double d = distance(m, p.states.back().x, origin(m));
      return d * d;
    });
  };
  const Moments a = sq(eps, T, 11), b = sq(1.0, eps * T, 12);
  EXPECT_NEAR(a.mean, b.mean, 3.0 * std::hypot(a.se, b.se));
}

TEST(Brownian, HeatSemigroupOnSphere) {
  const Manifold m = Manifold::sphere(1.0);
  const Point x0{0.6, 0.0, 0.8};
  const HeatSemigroupRecord at0 = estimate_heat_semigroup(m, x0, 0.0, 100, 1e-3);
  EXPECT_NEAR(at0.empirical, at0.theory, 1e-14);
  EXPECT_LT(at0.standard_error, 1e-14);
  const HeatSemigroupRecord rec = estimate_heat_semigroup(m, x0, 0.5, 4000, 1e-2, 1);
  EXPECT_NEAR(rec.theory, std::exp(-0.5) * 0.8, 1e-15);
  EXPECT_LT(std::abs(rec.z_score), 3.0);
  const HeatSemigroupRecord eq = estimate_heat_semigroup(m, Point{1.0, 0.0, 0.0}, 0.5, 4000, 1e-2, 2);
  EXPECT_EQ(eq.theory, 0.0);
  EXPECT_LT(std::abs(eq.empirical), 3.0 * eq.standard_error);
  EXPECT_THROW(estimate_heat_semigroup(Manifold::euclidean(2), Point{0.0, 0.0}, 0.5, 10, 1e-2), DomainError);
}

TEST(Brownian, HeatSemigroupIndependentOfThreads) {
  const Manifold m = Manifold::sphere(1.0);
  const Point x0{0.0, 0.6, 0.8};
  const auto a = estimate_heat_semigroup(m, x0, 0.2, 1000, 1e-2, 5, 1);
  const auto b = estimate_heat_semigroup(m, x0, 0.2, 1000, 1e-2, 5, 3);
  EXPECT_EQ(a.empirical, b.empirical);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(Brownian, CoupledNoiseSumsFineDraws) {
  const NoiseSource coarse = brownian_noise(4, 2, 3, 0.02, 2);
  const NoiseSource fine = brownian_noise(4, 2, 3, 0.01, 1);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_LT((coarse(i) - fine(2 * i) - fine(2 * i + 1)).norm(), 1e-15);
}

TEST(Brownian, RadialExitTime) {
  const Manifold m = Manifold::euclidean(1);
  const BrownianPath still = run_brownian(m, Point{0.0}, 0.0, 1.0, 0.1, 0);
  EXPECT_FALSE(radial_exit_time(still, Point{0.0}, 0.5).has_value());

  const BrownianPath moving = run_brownian(m, Point{0.0}, 1.0, 1.0, 0.1, 0);
  EXPECT_DOUBLE_EQ(*radial_exit_time(moving, Point{0.0}, 1e-12), 0.1);

  // Deterministic unit drift x(t) = t on the grid.
  BrownianPath drift{m, 0.01, 1.0, {}, {}, {}};
  for (int i = 0; i <= 100; ++i) {
    drift.times.push_back(i * 0.01);
    drift.states.push_back({Point{i * 0.01}, Mat::Identity(1, 1)});
  }
  EXPECT_NEAR(*radial_exit_time(drift, Point{0.0}, 0.37), 0.37, 1e-12);
  EXPECT_THROW(radial_exit_time(drift, Point{0.0}, 0.0), DomainError);
}

TEST(Brownian, ExitBoundFormula) {
  const double b = exit_bound(2, 1.0, 0.01, 0.5);
  EXPECT_NEAR(b, 2.0 * std::exp(-2.205), 1e-12);
  // The quoted figure 0.2204 is 2 exp(-2.205) = 0.22050 rounded down.
  EXPECT_NEAR(b, 0.2204, 2e-4);
  EXPECT_LT(exit_bound(2, 1.0, 0.01, 50.0), 1e-300);
  EXPECT_THROW(exit_bound(2, 1.0, 0.01, std::sqrt(2 * 2 * 1.0 * 0.01)), DomainError);
  EXPECT_THROW(exit_bound(2, 0.5, 0.01, 0.5), DomainError);
}

TEST(Brownian, CsvLayout) {
  const Manifold m = Manifold::hyperbolic2();
  std::ostringstream os;
  write_brownian_csv(os, run_brownian(m, origin(m), 1.0, 0.01, 1e-3, 0));
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,coord_0,coord_1");
}

TEST(EuclideanSde, ConstantDiffusionSchemesCoincide) {
  const VectorField b = [](const Vec& x) { return Vec::Zero(x.size()); };
  const MatrixField sigma = [](const Vec& x) { return Mat::Identity(x.size(), x.size()); };
  const NoiseSource noise = brownian_noise(6, 0, 2, 1e-2);
  const Vec x0 = Vec::Zero(2);
  const SdePath a = run_euclidean_sde(b, sigma, 0.3, x0, 1.0, 1e-2, SdeScheme::ItoEuler, noise);
  const SdePath h = run_euclidean_sde(b, sigma, 0.3, x0, 1.0, 1e-2, SdeScheme::StratonovichHeun, noise);
  const SdePath c = run_euclidean_sde(b, sigma, 0.3, x0, 1.0, 1e-2, SdeScheme::ItoWithCorrection, noise);
  Vec w = Vec::Zero(2);
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (i > 0) w += noise(i - 1);
    EXPECT_LT((a.states[i] - std::sqrt(0.3) * w).norm(), 1e-12);
    EXPECT_LT((h.states[i] - a.states[i]).norm(), 1e-12);
    EXPECT_LT((c.states[i] - a.states[i]).norm(), 1e-12);
  }
}

TEST(EuclideanSde, DriftCorrectionOfLinearDiffusion) {
  const MatrixField sigma = [](const Vec& x) { return Mat::Constant(1, 1, 2.0 * x[0]); };
  // (D sigma . sigma)(x) = 2 * 2x.
  EXPECT_NEAR(stratonovich_drift_correction(sigma, Vec::Constant(1, 0.7))[0], 2.8, 1e-8);
}

}  // namespace
}  // namespace grw
