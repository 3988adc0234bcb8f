#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ficnav/band_planner.hpp"

using namespace ficnav;

namespace {
const BandParams kP{50, 100, 0.5, 1.0, DofKind::kLinear};
}

TEST(BandForce, Unsaturated) { EXPECT_DOUBLE_EQ(band_force(kP, 0.1, 0.0), 5.0); }

TEST(BandForce, SaturatesAtMassTimesAccel) {
  EXPECT_DOUBLE_EQ(band_force(kP, 10.0, 0.0), 50.0);
  EXPECT_DOUBLE_EQ(band_force(kP, -10.0, 0.0), -50.0);
}

TEST(BandForce, AngularTakesShortArc) {
  BandParams p = kP;
  p.kind = DofKind::kAngular;
  const double f = band_force(p, std::numbers::pi - 0.05, -std::numbers::pi + 0.05);
  EXPECT_NEAR(f, 50 * -0.1, 1e-9);
}

TEST(BandStep, FixedPoint) {
  for (BandMode m : {BandMode::kPlainSpring, BandMode::kFractal}) {
    BandState s{0.3, 0.0, {}};
    const BandState n = band_step(s, kP, 0.3, 1e-3, m);
    EXPECT_EQ(n.x_d, 0.3);
    EXPECT_EQ(n.v_d, 0.0);
  }
}

TEST(BandStep, RejectsBadDt) {
  EXPECT_THROW(band_step({}, kP, 1.0, 0.0), InvalidInput);
  EXPECT_THROW(band_step({}, kP, 1.0, -1e-3), InvalidInput);
  EXPECT_THROW(band_step({}, kP, 1.0, 0.02), InvalidInput);
}

TEST(BandStep, RampReachesSpeedLimitAfterTwoSeconds) {
  // Error held at 10 by moving the target with the state.
  for (BandMode m : {BandMode::kPlainSpring, BandMode::kFractal}) {
    BandState s;
    for (int k = 0; k < 2000; ++k) s = band_step(s, kP, s.x_d + 10.0, 1e-3, m);
    EXPECT_NEAR(s.v_d, 1.0, 1e-9);
  }
}

TEST(BandStep, PlateausAtSpeedLimit) {
  BandState s;
  double peak = 0.0;
  for (int k = 0; k < 20000; ++k) {
    s = band_step(s, kP, 100.0, 1e-3);
    peak = std::max(peak, s.v_d);
  }
  EXPECT_EQ(peak, 1.0);
}

TEST(BandProperties, LimitsHoldForRandomTargets) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (BandMode m : {BandMode::kPlainSpring, BandMode::kFractal}) {
    BandState s;
    double target = 0.0;
    for (int k = 0; k < 200000; ++k) {
      if (k % 1500 == 0) target = u(g);
      const double v0 = s.v_d;
      s = band_step(s, kP, target, 1e-3, m);
      ASSERT_LE(std::fabs(s.v_d), kP.v_max);
      ASSERT_LE(std::fabs(s.v_d - v0) / 1e-3, kP.a_max * (1 + 1e-9));
    }
  }
}

TEST(BandProperties, FollowsSpringMassSolutionUnsaturated) {
  // k/M = 0.5 -> period 2 pi / sqrt(0.5); amplitude small enough to stay linear.
  const BandParams p{50, 100, 100.0, 100.0, DofKind::kLinear};
  const double dt = 1e-4, w = std::sqrt(p.k_band / p.m_desired), period = 2 * std::numbers::pi / w;
  BandState s{-0.1, 0.0, {}};
  const int steps = static_cast<int>(std::lround(period / dt));
  double max_err = 0.0;
  for (int k = 1; k <= steps; ++k) {
    s = band_step(s, p, 0.0, dt, BandMode::kPlainSpring);
    max_err = std::max(max_err, std::fabs(s.x_d - (-0.1 * std::cos(w * k * dt))));
  }
  // 1% of a period in phase corresponds to 2 pi * 0.01 * amplitude in position.
  EXPECT_LT(max_err, 2 * std::numbers::pi * 0.01 * 0.1);
}

TEST(BandProperties, TargetJumpKeepsStateContinuous) {
  BandState s;
  double max_dx = 0.0, max_dv = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double target = k < 3000 ? 5.0 : (k < 6000 ? -3.0 : 8.0);
    const BandState n = band_step(s, kP, target, 1e-3);
    max_dx = std::max(max_dx, std::fabs(n.x_d - s.x_d));
    max_dv = std::max(max_dv, std::fabs(n.v_d - s.v_d));
    s = n;
  }
  EXPECT_LE(max_dx, kP.v_max * 1e-3 * (1 + 1e-12));
  EXPECT_LE(max_dv, kP.a_max * 1e-3 * (1 + 1e-9));
}

TEST(BandProperties, SecondDifferenceBounded) {
  BandState s;
  std::vector<double> xs{0.0};
  for (int k = 0; k < 30000; ++k) {
    s = band_step(s, kP, k < 15000 ? 6.0 : -1.0, 1e-3);
    xs.push_back(s.x_d);
  }
  int violations = 0;
  for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
    const double acc = (xs[k + 1] - 2 * xs[k] + xs[k - 1]) / 1e-6;
    if (std::fabs(acc) > kP.a_max * (1 + 1e-6)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(BandPlanner, WrapsAngularState) {
  std::vector<BandParams> ps{kP, kP, {50, 100, 0.5, 1.0, DofKind::kAngular}};
  BandPlanner b(ps, DofVector{0, 0, 3.1}, BandMode::kFractal);
  for (int k = 0; k < 6000; ++k) b.step(DofVector{0, 0, -3.0}, 1e-3);
  const double yaw = b.desired()[2];
  EXPECT_GT(yaw, -std::numbers::pi);
  EXPECT_LE(yaw, std::numbers::pi);
  EXPECT_NEAR(wrap_angle(yaw - (-3.0)), 0.0, 0.05);
}

TEST(BandPlanner, RejectsMismatchAndBadParams) {
  EXPECT_THROW(BandPlanner({kP}, DofVector{0, 0}, BandMode::kFractal), InvalidInput);
  BandParams bad = kP;
  bad.v_max = 0;
  EXPECT_THROW(BandPlanner({bad}, DofVector{0}, BandMode::kFractal), InvalidInput);
}
