#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ficnav {

/// Thrown when an operation receives input outside its contract.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kMaxDof = 6;

enum class DofKind { kLinear, kAngular };

/// Planar agents expose (x, y, yaw); spatial agents (x, y, z, roll, pitch, yaw).
enum class AgentKind { kPlanar, kSpatial };

inline constexpr std::size_t dof_count(AgentKind kind) {
  return kind == AgentKind::kPlanar ? 3 : 6;
}

/// Number of leading translational DoFs.
inline constexpr std::size_t linear_count(AgentKind kind) {
  return kind == AgentKind::kPlanar ? 2 : 3;
}

inline constexpr std::size_t yaw_index(AgentKind kind) {
  return kind == AgentKind::kPlanar ? 2 : 5;
}

inline constexpr DofKind dof_kind(AgentKind kind, std::size_t i) {
  return i < linear_count(kind) ? DofKind::kLinear : DofKind::kAngular;
}

inline std::string_view dof_name(AgentKind kind, std::size_t i) {
  constexpr std::array<std::string_view, 3> planar{"x", "y", "yaw"};
  constexpr std::array<std::string_view, 6> spatial{"x", "y", "z", "roll", "pitch", "yaw"};
  return kind == AgentKind::kPlanar ? planar.at(i) : spatial.at(i);
}

/// Index into the six-slot (x, y, z, roll, pitch, yaw) table used by
/// scenario-wide per-DoF settings such as the viscous field.
inline constexpr std::size_t spatial_slot(AgentKind kind, std::size_t i) {
  if (kind == AgentKind::kSpatial) return i;
  constexpr std::array<std::size_t, 3> map{0, 1, 5};
  return map[i];
}

inline std::string_view agent_kind_name(AgentKind kind) {
  return kind == AgentKind::kPlanar ? "planar" : "spatial";
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

/// Error between a target and a state value; angular errors take the short arc.
inline double dof_error(DofKind kind, double target, double value) {
  const double e = target - value;
  return kind == DofKind::kAngular ? wrap_angle(e) : e;
}

inline double sign_of(double v) { return (v > 0.0) - (v < 0.0); }

/// Fixed-capacity vector of per-DoF values (at most six). Value type with no
/// heap allocation so agent state can be copied freely between threads.
class DofVector {
 public:
  DofVector() = default;
  explicit DofVector(std::size_t n, double fill = 0.0) : size_(n) {
    if (n > kMaxDof) throw InvalidInput("DofVector: more than 6 DoF requested");
    std::fill_n(data_.begin(), n, fill);
  }
  DofVector(std::initializer_list<double> values) : size_(values.size()) {
    if (size_ > kMaxDof) throw InvalidInput("DofVector: more than 6 DoF requested");
    std::copy(values.begin(), values.end(), data_.begin());
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* begin() { return data_.data(); }
  double* end() { return data_.data() + size_; }
  const double* begin() const { return data_.data(); }
  const double* end() const { return data_.data() + size_; }

  bool all_finite() const {
    return std::all_of(begin(), end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DofVector& a, const DofVector& b) {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
  }

 private:
  std::array<double, kMaxDof> data_{};
  std::size_t size_ = 0;
};

}  // namespace ficnav
