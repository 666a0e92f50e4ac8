#include "grw/config.hpp"
#include "grw/errors.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace grw {
namespace {

bool mentions(const std::vector<ConfigIssue>& issues, const std::string& key, int line = -1) {
  for (const auto& i : issues)
    if (i.key == key && (line < 0 || i.line == line)) return true;
  return false;
}

TEST(Config, MinimalConfigGetsDefaults) {
  const ConfigParse p = parse_config("command = walk\n");
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p.config->dt, 1e-3);
  EXPECT_EQ(p.config->replicas, 10000);
  EXPECT_EQ(p.config->seed, 0u);
  EXPECT_EQ(p.config->levels, (std::vector<int>{8, 16, 32, 64}));
}

TEST(Config, SyntaxFeatures) {
  const ConfigParse p = parse_config(
      "# comment\n"
      "[estimate]\n"
      "command = \"estimate\"\n"
      "manifold = sphere:2.5   # trailing comment\n"
      "target = dist:0.7\n"
      "levels = [2, 3, 4]\n"
      "replicas = 2000\n"
      "prefactor = false\n");
  ASSERT_TRUE(p.ok()) << p.errors.front().to_string();
  EXPECT_EQ(p.config->command, "estimate");
  EXPECT_EQ(p.config->levels, (std::vector<int>{2, 3, 4}));
  EXPECT_FALSE(p.config->prefactor);
  EXPECT_EQ(p.config->make_manifold(), Manifold::sphere(2.5));
  EXPECT_NEAR(distance(p.config->make_manifold(), p.config->make_x0(), p.config->make_target()), 0.7, 1e-12);
}

TEST(Config, NegativeDtNamesKey) {
  const ConfigParse p = parse_config("command = bm\ndt = -0.1\n");
  ASSERT_FALSE(p.ok());
  EXPECT_TRUE(mentions(p.errors, "dt", 2));
}

TEST(Config, UnknownManifoldListsKinds) {
  const ConfigParse p = parse_config("command = walk\nmanifold = torus:1\n");
  ASSERT_EQ(p.errors.size(), 1u);
  const std::string msg = p.errors[0].to_string();
  for (const char* kind : {"euclidean", "sphere", "hyperbolic"}) EXPECT_NE(msg.find(kind), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos);
}

TEST(Config, CollectsAllErrors) {
  const ConfigParse p = parse_config(
      "command = estimate\n"
      "colour = blue\n"
      "replicas = 10\n"
      "dt = 0\n"
      "seed = 1\n"
      "seed = 2\n");
  ASSERT_FALSE(p.ok());
  EXPECT_TRUE(mentions(p.errors, "colour", 2));
  EXPECT_TRUE(mentions(p.errors, "replicas", 3));
  EXPECT_TRUE(mentions(p.errors, "dt", 4));
  EXPECT_TRUE(mentions(p.errors, "seed", 6));
  EXPECT_TRUE(mentions(p.errors, "target"));
  for (std::size_t i = 1; i < p.errors.size(); ++i) EXPECT_LE(p.errors[i - 1].line, p.errors[i].line);
  EXPECT_THROW(parse_config_or_throw("command = estimate\ncolour = blue\n"), ConfigError);
}

TEST(Config, MalformedLine) {
  const ConfigParse p = parse_config("command = walk\njust some words\n");
  ASSERT_FALSE(p.ok());
  EXPECT_EQ(p.errors[0].line, 2);
}

TEST(Config, BadNumbers) {
  EXPECT_TRUE(mentions(parse_config("command = walk\nn = 1.5\n").errors, "n"));
  EXPECT_TRUE(mentions(parse_config("command = walk\neps = abc\n").errors, "eps"));
  EXPECT_TRUE(mentions(parse_config("command = estimate\ntarget=1\nlevels = [8, 4]\n").errors, "levels"));
}

TEST(Config, ManifoldSpecs) {
  EXPECT_EQ(parse_manifold("euclidean"), Manifold::euclidean(1));
  EXPECT_EQ(parse_manifold("euclidean:3"), Manifold::euclidean(3));
  EXPECT_EQ(parse_manifold("sphere:2:3"), Manifold::sphere(2.0, 3));
  EXPECT_EQ(parse_manifold("hyperbolic"), Manifold::hyperbolic2());
  EXPECT_THROW(parse_manifold("sphere:-1"), DomainError);
  EXPECT_THROW(parse_manifold("klein"), DomainError);
}

TEST(Config, FamilySpecs) {
  const Manifold m = Manifold::sphere(1.0);
  EXPECT_EQ(parse_family("gaussian", m).name(), MeasureFamily::gaussian(m).name());
  EXPECT_EQ(parse_family("ball:0.5", m).name(), MeasureFamily::uniform_ball(m, 0.5).name());
  const MeasureFamily mix = parse_family("radial:0.5@1,1.5@3", m);
  EXPECT_NEAR(mix.profile(1.0).value, MeasureFamily::radial_norm(m, NormLaw::discrete({0.5, 1.5}, {0.25, 0.75})).profile(1.0).value,
              1e-14);
  EXPECT_NO_THROW(parse_family("radial:halfnormal:0.7", m));
  EXPECT_THROW(parse_family("ball:-1", m), DomainError);
  EXPECT_THROW(parse_family("cauchy", m), DomainError);
}

TEST(Config, PointSpecs) {
  const Manifold h = Manifold::hyperbolic2();
  EXPECT_EQ(parse_point("origin", h).coords, origin(h).coords);
  EXPECT_NEAR(distance(h, origin(h), parse_point("dist:1.3", h)), 1.3, 1e-12);
  EXPECT_EQ(parse_point("0.5, 2", h).coords, (Vec{{0.5, 2.0}}));
  EXPECT_THROW(parse_point("0.5, -2", h), InvalidPoint);
  EXPECT_THROW(parse_point("1, 2, 3", h), InvalidPoint);
}

TEST(Config, FrameVectorUsesFirstDirection) {
  const Manifold s = Manifold::sphere(1.0);
  const Vec v = frame_vector(s, origin(s), {0.4});
  EXPECT_NEAR(v.norm(), 0.4, 1e-15);
  EXPECT_NEAR(v.dot(origin(s).coords), 0.0, 1e-15);
  EXPECT_THROW(frame_vector(s, origin(s), {1.0, 2.0, 3.0}), DomainError);
}

TEST(Config, TerminalSpecs) {
  const Manifold s = Manifold::sphere(1.0);
  const Point y = parse_point("dist:0.9", s);
  EXPECT_NEAR(parse_terminal("negsq:2", s).value(y), -2.0 * 0.81, 1e-12);
  EXPECT_NEAR(parse_terminal("height:3", s).value(y), 3.0 * std::cos(0.9), 1e-12);
  // The analytic differential agrees with central differences.
  const TerminalFunction f = parse_terminal("negsq:2", s);
  const TerminalFunction numeric{f.value, {}};
  EXPECT_LT((differential(s, f, y).components - differential(s, numeric, y).components).norm(), 1e-8);
  EXPECT_THROW(parse_terminal("cubic:1", s), DomainError);
}

}  // namespace
}  // namespace grw
