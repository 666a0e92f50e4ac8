#include "grw/errors.hpp"
#include "grw/walks.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace grw {
namespace {

TEST(Walks, EuclideanReductionIsExact) {
  const Manifold m = Manifold::euclidean(3);
  const WalkConfig cfg{MeasureFamily::gaussian(m), Point{0.5, -1.0, 2.0}, 40, 1.0, 99, 3};
  const WalkPath w = run_geodesic_walk(cfg);
  ASSERT_EQ(w.steps.size(), 41u);
  Vec acc = cfg.x0.coords;
  for (std::size_t i = 0; i < w.increments.size(); ++i) {
    acc = acc + (1.0 / cfg.n) * w.increments[i].components;
    for (Eigen::Index d = 0; d < 3; ++d) EXPECT_EQ(w.steps[i + 1][d], acc[d]);
  }
  // Raw draws come straight from the per-step streams.
  CounterStream rng(99, 3, 7);
  const Vec x7 = sample_increment(cfg.family, w.steps[7], rng).components;
  EXPECT_EQ(x7, w.increments[7].components);
}

TEST(Walks, ZeroIncrementsGiveConstantPath) {
  const Manifold m = Manifold::sphere(1.0);
  const WalkConfig cfg{MeasureFamily::gaussian(m), origin(m), 10, 2.0, 0, 0};
  const WalkPath w = run_geodesic_walk(cfg, [&](const Point& at, std::size_t) {
    return TangentVector{at, Vec::Zero(3)};
  });
  ASSERT_EQ(w.steps.size(), 21u);
  for (const auto& p : w.steps) EXPECT_EQ(p.coords, cfg.x0.coords);
}

TEST(Walks, UniformBallSpeedLimit) {
  for (const Manifold& m : testing::all_manifolds()) {
    const double r = 0.8;
    const WalkConfig cfg{MeasureFamily::uniform_ball(m, r), origin(m), 25, 2.0, 5, 0};
    const WalkPath w = run_geodesic_walk(cfg);
    for (double t = 0.0; t <= 2.0; t += 0.01) {
      EXPECT_LE(distance(m, cfg.x0, path_at(w, cfg, t)), r * t + r / cfg.n + 1e-12) << m.name();
    }
  }
}

TEST(Walks, StepCountAndBasePoints) {
  const Manifold m = Manifold::hyperbolic2();
  const WalkConfig cfg{MeasureFamily::gaussian(m), Point{0.0, 1.0}, 7, 1.5, 1, 0};
  EXPECT_EQ(step_count(cfg), 10u);
  std::vector<Point> bases;
  const IncrementSource inner = family_increments(cfg);
  const WalkPath w = run_geodesic_walk(cfg, [&](const Point& at, std::size_t i) {
    bases.push_back(at);
    return inner(at, i);
  });
  ASSERT_EQ(bases.size(), 10u);
  for (std::size_t i = 0; i < bases.size(); ++i) {
    EXPECT_EQ(bases[i].coords, w.steps[i].coords);
    EXPECT_EQ(w.steps[i + 1].coords, exp_map(m, {w.steps[i], (1.0 / cfg.n) * w.increments[i].components}).coords);
  }
}

TEST(Walks, PathAtUsesLeftStep) {
  const Manifold m = Manifold::sphere(1.0);
  const WalkConfig cfg{MeasureFamily::gaussian(m), origin(m), 10, 1.0, 2, 0};
  const WalkPath w = run_geodesic_walk(cfg);
  EXPECT_EQ(path_at(w, cfg, 0.0).coords, cfg.x0.coords);
  EXPECT_EQ(path_at(w, cfg, 1.0).coords, walk_endpoint(cfg).coords);
  EXPECT_EQ(path_at(w, cfg, 0.35).coords, w.steps[3].coords);
  EXPECT_EQ(path_at(w, cfg, 0.3).coords, w.steps[3].coords);
  EXPECT_THROW(path_at(w, cfg, 1.01), DomainError);
  EXPECT_THROW(path_at(w, cfg, -0.1), DomainError);
  const Point mid = path_at_interpolated(w, cfg, 0.35);
  EXPECT_NEAR(distance(m, w.steps[3], mid), 0.5 * distance(m, w.steps[3], w.steps[4]), 1e-12);
}

TEST(Walks, DeterministicGivenSeed) {
  const Manifold m = Manifold::sphere(1.0);
  WalkConfig cfg{MeasureFamily::uniform_ball(m, 1.0), origin(m), 50, 1.0, 17, 0};
  const WalkPath a = run_geodesic_walk(cfg), b = run_geodesic_walk(cfg);
  for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].coords, b.steps[i].coords);
  cfg.seed = 18;
  const WalkPath c = run_geodesic_walk(cfg);
  EXPECT_NE(a.steps.back().coords, c.steps.back().coords);
}

TEST(Walks, CurvatureBreaksExchangeability) {
  const Manifold m = Manifold::sphere(1.0);
  const Point x0 = origin(m);
  const Vec a = Vec::Unit(3, 0) * 0.5, b = Vec::Unit(3, 1) * 0.5;
  auto apply = [&](const Vec& first, const Vec& second) {
    // The second increment is drawn at the new base point: same frame coordinates.
    const Point y = exp_map(m, {x0, first});
    const Mat e0 = orthonormal_frame(m, x0), e1 = orthonormal_frame(m, y);
    const Vec coords = e0.transpose() * second;
    return exp_map(m, {y, e1 * coords});
  };
  EXPECT_GE(distance(m, apply(a, b), apply(b, a)), 1e-6);
  const Manifold e = Manifold::euclidean(2);
  EXPECT_EQ(exp_map(e, {exp_map(e, {Point{0.0, 0.0}, Vec::Unit(2, 0)}), Vec::Unit(2, 1)}).coords,
            exp_map(e, {exp_map(e, {Point{0.0, 0.0}, Vec::Unit(2, 1)}), Vec::Unit(2, 0)}).coords);
}

TEST(Walks, CsvLayout) {
  const Manifold m = Manifold::sphere(1.0);
  const WalkConfig cfg{MeasureFamily::gaussian(m), origin(m), 4, 1.0, 0, 0};
  std::ostringstream os;
  write_walk_csv(os, run_geodesic_walk(cfg), cfg);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,coord_0,coord_1,coord_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(Walks, InvalidConfigRejected) {
  const Manifold m = Manifold::euclidean(1);
  EXPECT_THROW(run_geodesic_walk({MeasureFamily::gaussian(m), Point{0.0}, 0, 1.0, 0, 0}), DomainError);
  EXPECT_THROW(run_geodesic_walk({MeasureFamily::gaussian(m), Point{0.0}, 5, -1.0, 0, 0}), DomainError);
  EXPECT_THROW(run_geodesic_walk({MeasureFamily::gaussian(m), Point{0.0, 1.0}, 5, 1.0, 0, 0}), InvalidPoint);
}

}  // namespace
}  // namespace grw
