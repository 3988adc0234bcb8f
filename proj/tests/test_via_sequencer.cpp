#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ficnav/via_sequencer.hpp"

using namespace ficnav;

namespace {
ViaPlan line_plan(std::vector<DofVector> vias, double r = 0.2) {
  ViaPlan p;
  p.agent_id = "a";
  p.kind = AgentKind::kPlanar;
  p.vias = std::move(vias);
  p.trigger_radius = r;
  return p;
}
}  // namespace

TEST(ViaSequencer, AdvancesInsideTriggerRadius) {
  ViaSequencer s(line_plan({{0, 0, 0}, {1, 0, 0}}));
  const DofVector t = s.current_target({0.05, 0, 0}, 0.0);
  EXPECT_EQ(s.cursor(), 1u);
  EXPECT_EQ(t[0], 1.0);
}

TEST(ViaSequencer, HoldsFinalViaPoint) {
  ViaSequencer s(line_plan({{0, 0, 0}, {1, 0, 0}}));
  s.current_target({0, 0, 0}, 0.0);
  for (int i = 0; i < 5; ++i) {
    const DofVector t = s.current_target({1, 0, 0}, 0.1 * i);
    EXPECT_EQ(t[0], 1.0);
  }
  EXPECT_EQ(s.advances(), 1u);
  EXPECT_TRUE(s.at_final());
}

TEST(ViaSequencer, AtMostOneAdvancePerCall) {
  ViaSequencer s(line_plan({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}));
  s.current_target({0, 0, 0}, 0.0);
  EXPECT_EQ(s.cursor(), 1u);
}

TEST(ViaSequencer, OutAndBackMazePlan) {
  // 1..9 out through 4a, back 8..1 through 4b: 10 distinct points,
  // 17 plan entries, 16 advances, 17 visits.
  std::vector<DofVector> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({double(i), 0, 0});
  std::vector<DofVector> plan;
  for (int i : {0, 1, 2, 3, 4, 5, 6, 7, 8}) plan.push_back(pts[i]);
  for (int i : {7, 6, 5, 4, 9, 2, 1, 0}) plan.push_back(i == 9 ? DofVector{3, 1, 0} : pts[i]);
  ViaSequencer s(line_plan(plan));
  std::size_t visits = 1;
  for (const DofVector& p : plan) {
    const std::size_t before = s.advances();
    s.current_target(p, 0.0);
    visits += s.advances() - before;
  }
  EXPECT_EQ(plan.size(), 17u);
  EXPECT_EQ(s.advances(), 16u);
  EXPECT_EQ(visits, 17u);
  EXPECT_TRUE(s.at_final());
}

TEST(ViaSequencer, ScheduleSwapsAndCursorStaysMonotone) {
  ViaPlan p = line_plan({{0, 0, 0}, {5, 0, 0}});
  p.schedule.push_back({30.0, {{-5, 0, 0}, {-6, 0, 0}}});
  ViaSequencer s(p);
  s.current_target({0, 0, 0}, 0.0);
  EXPECT_EQ(s.advances(), 1u);
  const DofVector t = s.current_target({1, 0, 0}, 30.0);
  EXPECT_EQ(t[0], -5.0);
  EXPECT_EQ(s.advances(), 1u);
  EXPECT_FALSE(s.at_final());
  s.current_target({-5, 0, 0}, 31.0);
  EXPECT_EQ(s.advances(), 2u);
  EXPECT_TRUE(s.at_final());
  EXPECT_EQ(s.final_via()[0], -6.0);
}

TEST(ViaSequencer, BoundaryRadii) {
  ViaSequencer tiny(line_plan({{0, 0, 0}, {1, 0, 0}}, 1e-12));
  tiny.current_target({1e-6, 0, 0}, 0.0);
  EXPECT_EQ(tiny.cursor(), 0u);
  std::vector<DofVector> many;
  for (int i = 0; i < 5; ++i) many.push_back({double(i), 0, 0});
  ViaSequencer huge(line_plan(many, 1e6));
  for (int k = 0; k < 10; ++k) huge.current_target({0, 0, 0}, 0.0);
  EXPECT_TRUE(huge.at_final());
}

TEST(ViaSequencer, RejectsInvalidPlans) {
  EXPECT_THROW(ViaSequencer(line_plan({})), InvalidInput);
  EXPECT_THROW(ViaSequencer(line_plan({{0, 0, 0}}, 0.0)), InvalidInput);
  ViaPlan p = line_plan({{0, 0, 0}});
  p.schedule = {{5.0, {{1, 0, 0}}}, {5.0, {{2, 0, 0}}}};
  EXPECT_THROW(ViaSequencer{p}, InvalidInput);
}

TEST(FaceTargetYaw, Quadrants) {
  EXPECT_DOUBLE_EQ(face_target_yaw(0, 0, 1, 0), 0.0);
  EXPECT_DOUBLE_EQ(face_target_yaw(0, 0, 0, 1), std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(face_target_yaw(1, 1, 0, 0), -3 * std::numbers::pi / 4);
}

TEST(FaceTargetYaw, DeadbandHoldsPreviousYaw) {
  ViaPlan p = line_plan({{0, 1, 0}, {0, 1, 0}}, 0.01);
  p.yaw_mode = YawMode::kFaceTarget;
  ViaSequencer s(p);
  EXPECT_NEAR(s.current_target({0, 0, 0}, 0)[2], std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(s.current_target({0.03, 0.99, 0}, 0)[2], std::numbers::pi / 2, 1e-12);
}
