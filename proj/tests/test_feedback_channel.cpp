#include <cmath>

#include <gtest/gtest.h>

#include "ficnav/feedback_channel.hpp"

using namespace ficnav;

namespace {
StateSample at(double x, double v = 0.0) { return {DofVector{x, 0, 0}, DofVector{v, 0, 0}}; }
}  // namespace

TEST(ZohChannel, MatchedRateIsPassThrough) {
  ZohChannel z(1000.0);
  for (int k = 0; k < 5000; ++k) {
    const double t = k * 1e-3;
    EXPECT_EQ(z.sample(at(std::sin(t)), t).pose[0], std::sin(t)) << k;
  }
}

TEST(ZohChannel, TenHertzHoldsHundredSteps) {
  ZohChannel z(10.0);
  int changes = 0, run = 0, longest = 0;
  double last = z.sample(at(0.0), 0.0).pose[0];
  for (int k = 1; k < 1000; ++k) {
    const double t = k * 1e-3;
    const double v = z.sample(at(t), t).pose[0];
    if (v != last) {
      ++changes;
      longest = std::max(longest, run + 1);
      run = 0;
    } else {
      ++run;
    }
    last = v;
  }
  EXPECT_EQ(changes, 9);
  EXPECT_EQ(longest, 100);
}

TEST(ZohChannel, RampStaircaseErrorBound) {
  ZohChannel z(10.0);
  double worst = 0.0;
  for (int k = 0; k <= 3000; ++k) {
    const double t = k * 1e-3;
    worst = std::max(worst, t - z.sample(at(t, 1.0), t).pose[0]);
  }
  EXPECT_LE(worst, 0.1 + 1e-12);
  EXPECT_GE(worst, 0.099 - 1e-12);
}

TEST(ZohChannel, HoldsVelocityToo) {
  ZohChannel z(10.0);
  z.sample(at(0.0, 1.0), 0.0);
  EXPECT_EQ(z.sample(at(0.05, 3.0), 0.05).twist[0], 1.0);
}

TEST(ZohChannel, RejectsTimeRegression) {
  ZohChannel z(100.0);
  z.sample(at(0.0), 1.0);
  EXPECT_THROW(z.sample(at(0.0), 0.5), InvalidInput);
}

TEST(ZohChannel, RejectsBadRate) {
  EXPECT_THROW(ZohChannel(0.0), InvalidInput);
  EXPECT_THROW(ZohChannel(-5.0), InvalidInput);
}

TEST(ZohChannel, SampleTimesOnGrid) {
  ZohChannel z(10.0);
  for (int k = 0; k < 1000; ++k) z.sample(at(k), k * 1e-3);
  EXPECT_NEAR(z.last_sample_time(), 0.9, 1e-12);
  EXPECT_EQ(z.held().pose[0], 900.0);
}

TEST(ZohChannel, FreshFlagMarksNewSamples) {
  ZohChannel z(10.0);
  int fresh = 0;
  for (int k = 0; k < 1000; ++k) {
    z.sample(at(k), k * 1e-3);
    if (z.fresh()) {
      EXPECT_EQ(k % 100, 0) << k;
      ++fresh;
    }
  }
  EXPECT_EQ(fresh, 10);
}

TEST(ZohChannel, FullRateAlwaysFresh) {
  ZohChannel z(1000.0);
  for (int k = 0; k < 100; ++k) {
    z.sample(at(k), k * 1e-3);
    EXPECT_TRUE(z.fresh());
  }
}
