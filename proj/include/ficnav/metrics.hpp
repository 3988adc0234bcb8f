#pragma once

// Post-run analysis over trajectory logs: tracking RMSE with angular
// wrapping, peak momentum / power of the planned trajectory, and the
// minimum-jerk reference used to compare against it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ficnav/dof.hpp"

namespace ficnav {

/// Per-agent time series on a uniform grid. All channels have equal length.
struct AgentTrack {
  std::string id;
  std::vector<DofKind> dofs;
  std::vector<DofVector> vp;    // active via-point
  std::vector<DofVector> xd;    // planned (band) state
  std::vector<DofVector> vd;    // planned rate
  std::vector<DofVector> x;     // actual pose
  std::vector<DofVector> v;     // actual twist
  std::vector<DofVector> acc;   // actual acceleration, world frame
  std::vector<DofVector> w;     // controller wrench
  std::vector<DofVector> wext;  // bubble wrench
  std::vector<long> advances;   // via-points issued so far

  std::size_t size() const { return x.size(); }
};

struct TrajectoryLog {
  double dt = 1e-3;
  std::vector<AgentTrack> agents;

  std::size_t size() const { return agents.empty() ? 0 : agents.front().size(); }
};

enum class Channel { kViaPoint, kDesired, kDesiredRate, kActual, kRate, kAccel, kWrench, kExternal };

inline const std::vector<DofVector>& channel(const AgentTrack& a, Channel c) {
  switch (c) {
    case Channel::kViaPoint: return a.vp;
    case Channel::kDesired: return a.xd;
    case Channel::kDesiredRate: return a.vd;
    case Channel::kActual: return a.x;
    case Channel::kRate: return a.v;
    case Channel::kAccel: return a.acc;
    case Channel::kWrench: return a.w;
    case Channel::kExternal: return a.wext;
  }
  return a.x;
}

/// Streaming sum of squared per-DoF differences.
class RmseAccumulator {
 public:
  RmseAccumulator() = default;
  explicit RmseAccumulator(std::vector<DofKind> dofs) : dofs_(std::move(dofs)), sums_(dofs_.size()) {}

  void add(const DofVector& ref, const DofVector& actual) {
    for (std::size_t i = 0; i < dofs_.size(); ++i) {
      const double e = dof_error(dofs_[i], ref[i], actual[i]);
      sums_[i] += e * e;
    }
    ++count_;
  }

  std::vector<double> result() const {
    if (count_ == 0) throw InvalidInput("rmse: empty series");
    std::vector<double> out(sums_.size());
    for (std::size_t i = 0; i < sums_.size(); ++i) out[i] = std::sqrt(sums_[i] / double(count_));
    return out;
  }
  std::size_t count() const { return count_; }

 private:
  std::vector<DofKind> dofs_;
  std::vector<double> sums_;
  std::size_t count_ = 0;
};

/// Per-DoF root-mean-square difference; angular DoFs use the wrapped error.
inline std::vector<double> rmse(std::span<const DofVector> ref, std::span<const DofVector> actual,
                                const std::vector<DofKind>& dofs) {
  if (ref.size() != actual.size()) throw InvalidInput("rmse: channel lengths differ");
  if (ref.empty()) throw InvalidInput("rmse: empty log");
  RmseAccumulator acc(dofs);
  for (std::size_t k = 0; k < ref.size(); ++k) acc.add(ref[k], actual[k]);
  return acc.result();
}

inline std::vector<double> rmse(const AgentTrack& a, Channel ref, Channel actual) {
  return rmse(channel(a, ref), channel(a, actual), a.dofs);
}

/// RMS over a group of per-DoF RMSE values.
inline double group_rmse(const std::vector<double>& per_dof, const std::vector<std::size_t>& group) {
  double s = 0.0;
  for (std::size_t i : group) s += per_dof.at(i) * per_dof.at(i);
  return group.empty() ? 0.0 : std::sqrt(s / double(group.size()));
}

struct MinJerkSample {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};

/// Quintic rest-to-rest blend x0 + (x1 - x0)(10 s^3 - 15 s^4 + 6 s^5), s = t / T.
inline MinJerkSample min_jerk(double x0, double x1, double duration, double t) {
  if (!(duration > 0.0)) throw InvalidInput("min_jerk: duration must be positive");
  if (t < 0.0 || t > duration) throw InvalidInput("min_jerk: t outside [0, T]");
  const double d = x1 - x0, s = t / duration;
  const double s2 = s * s, s3 = s2 * s;
  return {x0 + d * s3 * (10.0 - 15.0 * s + 6.0 * s2),
          d / duration * s2 * (30.0 - 60.0 * s + 30.0 * s2),
          d / (duration * duration) * s * (60.0 - 180.0 * s + 120.0 * s2)};
}

/// Central differences of a rate series, one-sided at the ends.
inline std::vector<DofVector> differentiate(std::span<const DofVector> rate, double dt) {
  const std::size_t n = rate.size();
  std::vector<DofVector> out(n);
  if (n == 0) return out;
  const std::size_t dofs = rate.front().size();
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = DofVector(dofs);
    if (n == 1) continue;
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == n ? n - 1 : k + 1;
    for (std::size_t i = 0; i < dofs; ++i)
      out[k][i] = (rate[hi][i] - rate[lo][i]) / (double(hi - lo) * dt);
  }
  return out;
}

/// max_t || M v ||, over the DoFs in `mask`.
inline double peak_momentum(std::span<const DofVector> rate, const DofVector& inertia,
                            const std::vector<std::size_t>& mask) {
  double best = 0.0;
  for (const DofVector& v : rate) {
    double s = 0.0;
    for (std::size_t i : mask) s += (inertia[i] * v[i]) * (inertia[i] * v[i]);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

/// max_t | v^T M a |, over the DoFs in `mask`.
inline double peak_power(std::span<const DofVector> rate, std::span<const DofVector> accel,
                         const DofVector& inertia, const std::vector<std::size_t>& mask) {
  if (rate.size() != accel.size()) throw InvalidInput("peak_power: channel lengths differ");
  double best = 0.0;
  for (std::size_t k = 0; k < rate.size(); ++k) {
    double s = 0.0;
    for (std::size_t i : mask) s += rate[k][i] * inertia[i] * accel[k][i];
    best = std::max(best, std::abs(s));
  }
  return best;
}

inline std::vector<std::size_t> linear_mask(const std::vector<DofKind>& dofs) {
  std::vector<std::size_t> m;
  for (std::size_t i = 0; i < dofs.size(); ++i)
    if (dofs[i] == DofKind::kLinear) m.push_back(i);
  return m;
}

struct MinJerkComparison {
  std::size_t begin = 0;
  std::size_t end = 0;
  /// Motion duration used for the minimum-jerk counterpart.
  double duration = 0.0;
  double planned_q = 0.0;
  double planned_p = 0.0;
  double min_jerk_q = 0.0;
  double min_jerk_p = 0.0;
  DofVector start;
  DofVector finish;
  DofVector min_jerk_finish;

  double q_ratio() const { return min_jerk_q > 0.0 ? planned_q / min_jerk_q : 0.0; }
  double p_ratio() const { return min_jerk_p > 0.0 ? planned_p / min_jerk_p : 0.0; }
};

/// First interval over which the via-point channel is constant.
inline std::pair<std::size_t, std::size_t> first_hold_interval(const AgentTrack& a) {
  if (a.vp.empty()) throw InvalidInput("compare_with_min_jerk: empty log");
  std::size_t end = 1;
  while (end < a.vp.size() && a.vp[end] == a.vp[0]) ++end;
  return {0, end};
}

/// Compares the planned segment [begin, end) against a minimum-jerk motion
/// with the same endpoints. The duration is the time until the planned state
/// first comes within 1e-3 of the travel distance from its final value.
inline MinJerkComparison compare_with_min_jerk(const AgentTrack& a, double dt, const DofVector& inertia,
                                               std::size_t begin, std::size_t end,
                                               const std::vector<std::size_t>& mask) {
  if (end > a.size() || begin >= end || end - begin < 10)
    throw InvalidInput("compare_with_min_jerk: segment shorter than 10 samples");
  MinJerkComparison r;
  r.begin = begin;
  r.end = end;
  r.start = a.xd[begin];
  r.finish = a.xd[end - 1];
  r.min_jerk_finish = r.finish;

  auto distance = [&](const DofVector& p, const DofVector& q) {
    double s = 0.0;
    for (std::size_t i : mask) s += (p[i] - q[i]) * (p[i] - q[i]);
    return std::sqrt(s);
  };
  const double travel = distance(r.start, r.finish);
  if (travel == 0.0) return r;

  std::size_t arrive = end - 1;
  for (std::size_t k = begin; k < end; ++k) {
    if (distance(a.xd[k], r.finish) <= 1e-3 * travel) {
      arrive = k;
      break;
    }
  }
  r.duration = double(std::max<std::size_t>(arrive - begin, 1)) * dt;

  const std::span<const DofVector> vd(a.vd.data() + begin, end - begin);
  const auto ad = differentiate(vd, dt);
  r.planned_q = peak_momentum(vd, inertia, mask);
  r.planned_p = peak_power(vd, ad, inertia, mask);

  const std::size_t n = r.start.size();
  std::vector<DofVector> mj_v, mj_a;
  for (std::size_t k = begin; k < end; ++k) {
    const double t = std::min(double(k - begin) * dt, r.duration);
    DofVector v(n), acc(n);
    for (std::size_t i : mask) {
      const MinJerkSample s = min_jerk(r.start[i], r.finish[i], r.duration, t);
      v[i] = s.velocity;
      acc[i] = s.acceleration;
      if (k + 1 == end) r.min_jerk_finish[i] = min_jerk(r.start[i], r.finish[i], r.duration, r.duration).position;
    }
    mj_v.push_back(v);
    mj_a.push_back(acc);
  }
  r.min_jerk_q = peak_momentum(mj_v, inertia, mask);
  r.min_jerk_p = peak_power(mj_v, mj_a, inertia, mask);
  return r;
}

inline MinJerkComparison compare_with_min_jerk(const AgentTrack& a, double dt, const DofVector& inertia) {
  const auto [b, e] = first_hold_interval(a);
  return compare_with_min_jerk(a, dt, inertia, b, e, linear_mask(a.dofs));
}

}  // namespace ficnav
