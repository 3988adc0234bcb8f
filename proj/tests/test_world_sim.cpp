#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ficnav/world_sim.hpp"

using namespace ficnav;

namespace {

const RoaProfileParams kRep{100, 0.1, 0.3, 50};

AgentBody planar_body(std::string id, DofVector pose, DofVector inertia = {1, 1, 1}) {
  AgentBody b;
  b.id = std::move(id);
  b.kind = AgentKind::kPlanar;
  b.pose = pose;
  b.twist = DofVector(3);
  b.inertia = inertia;
  b.limits = {DofVector(3, 1e9), DofVector(3, 1e9), DofVector(3, 1e9)};
  return b;
}

double norm2(const DofVector& w) { return std::hypot(w[0], w[1]); }

}  // namespace

TEST(AgentAccel, EqualWrenchesCancel) {
  const auto b = planar_body("a", {0, 0, 0.3});
  const DofVector a = agent_accel(b, {3, -2, 1}, {3, -2, 1});
  for (double v : a) EXPECT_EQ(v, 0.0);
}

TEST(AgentAccel, ComponentwiseDivision) {
  const auto b = planar_body("a", {0, 0, 0}, {100, 100, 20});
  const DofVector a = agent_accel(b, {50, 0, 2}, DofVector(3));
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.0);
  EXPECT_DOUBLE_EQ(a[2], 0.1);
}

TEST(AgentAccel, QuarterTurnRotatesForward) {
  const auto b = planar_body("a", {0, 0, std::numbers::pi / 2});
  const DofVector a = agent_accel(b, {1, 0, 0}, DofVector(3));
  // [cos -sin; sin cos] at 90 degrees maps (1, 0) to (0, 1)
  EXPECT_NEAR(a[0], 0.0, 1e-15);
  EXPECT_NEAR(a[1], 1.0, 1e-15);
}

TEST(BubbleWrench, ZeroOutsideRadius) {
  Bubble b{BubbleShape::kCircle, 1.5, {}, kRep};
  Obstacle o{"box", Box{{3.0, 0, 0}, {1.0, 1.0, 1.0}}};
  std::vector<Obstacle> obs{o};
  const DofVector w = bubble_wrench(b, AgentKind::kPlanar, {0, 0, 0}, {obs, {}, 0, 0.0});
  EXPECT_EQ(norm2(w), 0.0);
}

TEST(BubbleWrench, SaturatesNearContact) {
  Bubble b{BubbleShape::kCircle, 1.5, {}, kRep};
  std::vector<Vec3> agents{{0, 0, 0}, {1e-9, 0, 0}};
  const DofVector w = bubble_wrench(b, AgentKind::kPlanar, {0, 0, 0}, {{}, agents, 0, 0.0});
  EXPECT_NEAR(norm2(w), 50.0, 1e-9);
}

TEST(BubbleWrench, MidBranchMagnitudeAlongSeparation) {
  Bubble b{BubbleShape::kCircle, 1.5, {}, kRep};
  std::vector<Vec3> agents{{0, 0, 0}, {0.8, 0.6, 0}};  // d = 1.0... scaled below
  const double d = 1.3;
  agents[1] = {0.8 * d, 0.6 * d, 0};
  const DofVector w = bubble_wrench(b, AgentKind::kPlanar, {0, 0, 0}, {{}, agents, 0, 0.0});
  EXPECT_NEAR(norm2(w), 49.998184, 1e-6);
  // W_ext points at the other agent, so W - W_ext pushes away from it.
  EXPECT_NEAR(w[0] / norm2(w), 0.8, 1e-12);
  EXPECT_NEAR(w[1] / norm2(w), 0.6, 1e-12);
  EXPECT_EQ(w[2], 0.0);
}

TEST(BubbleWrench, CoincidentCentresUseFixedFallback) {
  Bubble b{BubbleShape::kCircle, 1.5, {}, kRep};
  std::vector<Vec3> agents{{1, 1, 0}, {1, 1, 0}};
  const DofVector w0 = bubble_wrench(b, AgentKind::kPlanar, {1, 1, 0}, {{}, agents, 0, 0.0});
  const DofVector w1 = bubble_wrench(b, AgentKind::kPlanar, {1, 1, 0}, {{}, agents, 1, 0.0});
  EXPECT_NEAR(std::fabs(w0[0]), 50.0, 1e-12);
  EXPECT_EQ(w0[0], -w1[0]);
}

TEST(BubbleWrench, WallInsideFieldRepels) {
  Bubble b{BubbleShape::kCircle, 1.0, {}, kRep};
  std::vector<Obstacle> obs{{"w", Wall{{-5, 1, 0}, {5, 1, 0}, 0.2}}};
  const DofVector w = bubble_wrench(b, AgentKind::kPlanar, {0, 0, 0}, {obs, {}, 0, 0.0});
  // closest point (0, 0.9), depth 0.1 -> linear zone edge
  EXPECT_NEAR(w[1], roa_force(kRep, 0.1), 1e-9);
  EXPECT_NEAR(w[0], 0.0, 1e-12);
}

TEST(BubbleWrench, InactiveObstacleIgnored) {
  Bubble b{BubbleShape::kCircle, 1.0, {}, kRep};
  Obstacle o{"w", Wall{{-5, 0.5, 0}, {5, 0.5, 0}, 0.2}};
  o.active_from = 2.0;
  std::vector<Obstacle> obs{o};
  EXPECT_EQ(norm2(bubble_wrench(b, AgentKind::kPlanar, {0, 0, 0}, {obs, {}, 0, 1.0})), 0.0);
  EXPECT_GT(norm2(bubble_wrench(b, AgentKind::kPlanar, {0, 0, 0}, {obs, {}, 0, 2.5})), 0.0);
}

TEST(BubbleWrench, RectangleRepelsThroughNearestFace) {
  Bubble b{BubbleShape::kRectangle, 0.0, {1.0, 0.5, 0.5}, kRep};
  std::vector<Vec3> agents{{0, 0, 0}, {0.2, 0.3, 0}};
  const DofVector w = bubble_wrench(b, AgentKind::kPlanar, {0, 0, 0}, {{}, agents, 0, 0.0});
  // slack x = 0.8, y = 0.2 -> exit along y with depth 0.2
  EXPECT_NEAR(w[1], roa_force(kRep, 0.2), 1e-9);
  EXPECT_NEAR(w[0], 0.0, 1e-12);
}

TEST(StepWorld, ConstantForceIsExact) {
  World w;
  w.agents.push_back(planar_body("m", {0, 0, 0}));
  const std::vector<DofVector> f{{1, 0, 0}};
  for (int k = 0; k < 1000; ++k) step_world(w, f, 1e-3);
  EXPECT_NEAR(w.agents[0].pose[0], 0.5, 1e-12);
  EXPECT_NEAR(w.agents[0].twist[0], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(w.time, 1.0);
}

TEST(StepWorld, ViscousDecayMatchesExponential) {
  World w;
  w.agents.push_back(planar_body("m", {0, 0, 0}));
  w.agents[0].twist = {1, 0, 0};
  w.viscous.c[0] = 0.5;
  const std::vector<DofVector> f{DofVector(3)};
  for (int k = 0; k < 2000; ++k) step_world(w, f, 1e-3);
  EXPECT_NEAR(w.agents[0].twist[0], std::exp(-1.0), 1e-9);
}

TEST(StepWorld, SymmetricPairStaysMirrored) {
  World w;
  Bubble b{BubbleShape::kCircle, 1.5, {}, kRep};
  w.agents.push_back(planar_body("l", {-0.5, 0, 0}));
  w.agents.push_back(planar_body("r", {0.5, 0, 0}));
  for (auto& a : w.agents) a.bubble = b;
  const std::vector<DofVector> f{DofVector(3), DofVector(3)};
  for (int k = 0; k < 3000; ++k) {
    step_world(w, f, 1e-3);
    ASSERT_NEAR(w.agents[0].pose[0], -w.agents[1].pose[0], 1e-9);
    ASSERT_NEAR(w.agents[0].twist[0], -w.agents[1].twist[0], 1e-9);
  }
  EXPECT_GT(w.agents[1].pose[0] - w.agents[0].pose[0], 1.5);
}

TEST(StepWorld, WrenchLimitClampsAcceleration) {
  World w;
  auto b = planar_body("m", {0, 0, 0.7}, {2, 2, 1});
  b.limits.wrench_max = {4, 4, 1};
  w.agents.push_back(b);
  StepDiagnostics d;
  step_world(w, std::vector<DofVector>{{100, 0, 0}}, 1e-3, &d);
  const DofVector body = world_to_body(AgentKind::kPlanar, 0.7, d.accel[0]);
  EXPECT_NEAR(body[0], 2.0, 1e-12);
  EXPECT_NEAR(std::fabs(body[1]), 2.0, 1e-12);
}

TEST(StepWorld, HaltsOnNonFinite) {
  World w;
  w.agents.push_back(planar_body("bad", {0, 0, 0}));
  try {
    step_world(w, std::vector<DofVector>{{std::nan(""), 0, 0}}, 1e-3);
    FAIL() << "expected halt";
  } catch (const SimulationHalt& e) {
    EXPECT_EQ(e.agent(), "bad");
    EXPECT_EQ(e.step(), 0);
  }
}

TEST(StepWorld, RejectsBadInput) {
  World w;
  w.agents.push_back(planar_body("m", {0, 0, 0}));
  EXPECT_THROW(step_world(w, std::vector<DofVector>{DofVector(3)}, 0.0), InvalidInput);
  EXPECT_THROW(step_world(w, std::vector<DofVector>{DofVector(6)}, 1e-3), InvalidInput);
  EXPECT_THROW(step_world(w, std::vector<DofVector>{}, 1e-3), InvalidInput);
}

TEST(StepWorld, ScriptedObstacleMovesContinuously) {
  Obstacle o{"o", Box{{0, 0, 0}, {0.5, 0.5, 0.5}}};
  o.track = ScriptedTrack{{{0.0, {0, 0, 0}}, {2.0, {2, 0, 0}}}};
  const Vec3 p1 = anchor(o.geometry_at(1.0));
  EXPECT_NEAR(p1[0], 1.0, 1e-12);
  EXPECT_NEAR(anchor(o.geometry_at(5.0))[0], 2.0, 1e-12);
  EXPECT_TRUE(penetrates(o, {1.2, 0, 0}, 1.0, true));
  EXPECT_FALSE(penetrates(o, {1.2, 0, 0}, 0.0, true));
}

TEST(Geometry, GateOpeningIsFree) {
  Gate g{{0, 0, 2}, 0, 1, 2.0, 2.0, 0.2};
  Obstacle o{"g", g};
  EXPECT_FALSE(penetrates(o, {0, 0, 2}, 0.0, false));
  EXPECT_TRUE(penetrates(o, {0, 1.1, 2}, 0.0, false));
  EXPECT_TRUE(penetrates(o, {0, 0, 3.1}, 0.0, false));
}
