#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ficnav/dof.hpp"

namespace ficnav {

enum class YawMode { kExplicit, kFaceTarget };

/// Plan swap: at `time` the remaining via-points are replaced by `vias`.
struct ViaSwap {
  double time = 0.0;
  std::vector<DofVector> vias;
  friend bool operator==(const ViaSwap&, const ViaSwap&) = default;
};

struct ViaPlan {
  std::string agent_id;
  AgentKind kind = AgentKind::kPlanar;
  std::vector<DofVector> vias;
  double trigger_radius = 0.2;
  YawMode yaw_mode = YawMode::kExplicit;
  /// Below this planar distance face-target mode keeps the previous yaw.
  double yaw_deadband = 0.05;
  std::vector<ViaSwap> schedule;
};

inline void check_plan(const ViaPlan& p) {
  if (!(p.trigger_radius > 0.0)) throw InvalidInput("ViaPlan: trigger radius must be positive");
  if (p.vias.empty()) throw InvalidInput("ViaPlan: plan must not be empty");
  for (std::size_t i = 0; i < p.schedule.size(); ++i) {
    if (p.schedule[i].vias.empty()) throw InvalidInput("ViaPlan: scheduled plan must not be empty");
    if (i > 0 && !(p.schedule[i].time > p.schedule[i - 1].time))
      throw InvalidInput("ViaPlan: schedule times must be strictly increasing");
  }
}

/// Heading from pose toward the via-point, in (-pi, pi].
inline double face_target_yaw(double px, double py, double vx, double vy) {
  return wrap_angle(std::atan2(vy - py, vx - px));
}

inline double positional_distance(AgentKind kind, const DofVector& a, const DofVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < linear_count(kind); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Stateful cursor over a ViaPlan. One writer per agent.
class ViaSequencer {
 public:
  ViaSequencer() = default;
  explicit ViaSequencer(ViaPlan plan) : plan_(std::move(plan)), active_(plan_.vias) {
    check_plan(plan_);
  }

  /// Target for this step. Advances at most once per call when the pose is
  /// within the trigger radius of the current via-point; the last via-point
  /// is held.
  DofVector current_target(const DofVector& pose, double t) {
    while (next_swap_ < plan_.schedule.size() && t >= plan_.schedule[next_swap_].time) {
      active_ = plan_.schedule[next_swap_].vias;
      cursor_ = 0;
      ++next_swap_;
    }
    if (cursor_ + 1 < active_.size() &&
        positional_distance(plan_.kind, pose, active_[cursor_]) < plan_.trigger_radius) {
      ++cursor_;
      ++advances_;
    }
    DofVector target = active_[cursor_];
    if (plan_.yaw_mode == YawMode::kFaceTarget) {
      const std::size_t yi = yaw_index(plan_.kind);
      const double dx = target[0] - pose[0], dy = target[1] - pose[1];
      if (std::hypot(dx, dy) > plan_.yaw_deadband) {
        last_yaw_ = face_target_yaw(pose[0], pose[1], target[0], target[1]);
        have_yaw_ = true;
      } else if (!have_yaw_) {
        last_yaw_ = pose[yi];
        have_yaw_ = true;
      }
      target[yi] = last_yaw_;
    }
    return target;
  }

  /// Cursor within the active plan.
  std::size_t cursor() const { return cursor_; }
  /// Total advances so far; monotone across plan swaps.
  std::size_t advances() const { return advances_; }
  bool at_final() const { return next_swap_ == plan_.schedule.size() && cursor_ + 1 == active_.size(); }
  const DofVector& final_via() const {
    return plan_.schedule.empty() ? plan_.vias.back() : plan_.schedule.back().vias.back();
  }
  const ViaPlan& plan() const { return plan_; }

 private:
  ViaPlan plan_;
  std::vector<DofVector> active_;
  std::size_t cursor_ = 0;
  std::size_t next_swap_ = 0;
  std::size_t advances_ = 0;
  double last_yaw_ = 0.0;
  bool have_yaw_ = false;
};

}  // namespace ficnav
