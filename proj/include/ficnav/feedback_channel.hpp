#pragma once

#include <cmath>
#include <cstdint>

#include "ficnav/dof.hpp"

namespace ficnav {

struct StateSample {
  DofVector pose;
  DofVector twist;
};

/// Zero-order-hold sampler: captures the true state on a fixed 1/rate grid
/// and holds it in between. No extrapolation, no estimation.
class ZohChannel {
 public:
  ZohChannel() = default;
  explicit ZohChannel(double rate_hz) : rate_(rate_hz) {
    if (!(rate_hz > 0.0) || !std::isfinite(rate_hz))
      throw InvalidInput("ZohChannel: rate must be positive and finite");
  }

  const StateSample& sample(const StateSample& truth, double t) {
    if (primed_ && t < last_query_) throw InvalidInput("ZohChannel: time went backwards");
    // Grid index of the latest sample instant <= t, tolerant to dt rounding.
    const auto k = static_cast<std::int64_t>(std::floor(t * rate_ + 1e-7));
    fresh_ = !primed_ || k > last_index_;
    if (fresh_) {
      held_ = truth;
      last_index_ = k;
      primed_ = true;
    }
    last_query_ = t;
    return held_;
  }

  double rate() const { return rate_; }
  double last_sample_time() const { return static_cast<double>(last_index_) / rate_; }
  const StateSample& held() const { return held_; }
  /// True when the last sample() call captured a new measurement.
  bool fresh() const { return fresh_; }

 private:
  double rate_ = 1000.0;
  StateSample held_;
  std::int64_t last_index_ = 0;
  double last_query_ = 0.0;
  bool primed_ = false;
  bool fresh_ = false;
};

}  // namespace ficnav
