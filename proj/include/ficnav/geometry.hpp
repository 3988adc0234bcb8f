#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ficnav/dof.hpp"

namespace ficnav {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Axis-aligned box.
struct Box {
  Vec3 center{};
  Vec3 half{};
  friend bool operator==(const Box&, const Box&) = default;
};

/// Straight wall between two xy points, with thickness, spanning [z_min, z_max].
struct Wall {
  Vec3 from{};
  Vec3 to{};
  double thickness = 0.1;
  double z_min = -1e3;
  double z_max = 1e3;
  friend bool operator==(const Wall&, const Wall&) = default;
};

/// Rectangular aperture whose plane is normal to `axis` (0 = x, 1 = y) and
/// must be crossed along `direction` (+1 or -1). The frame is four bars of
/// cross-section `frame` surrounding a width x height opening.
struct Gate {
  Vec3 center{};
  int axis = 0;
  int direction = 1;
  double width = 2.0;
  double height = 2.0;
  double frame = 0.2;
  friend bool operator==(const Gate&, const Gate&) = default;
};

using Geometry = std::variant<Box, Wall, Gate>;

inline std::array<Box, 4> gate_frame(const Gate& g) {
  const int lateral = g.axis == 0 ? 1 : 0;
  const double hw = 0.5 * g.width, hh = 0.5 * g.height, f = 0.5 * g.frame;
  std::array<Box, 4> bars{};
  for (int side = 0; side < 2; ++side) {
    const double s = side == 0 ? -1.0 : 1.0;
    Box post;
    post.center = g.center;
    post.center[lateral] += s * (hw + f);
    post.half[g.axis] = f;
    post.half[lateral] = f;
    post.half[2] = hh + 2.0 * f;
    bars[side] = post;
    Box bar;
    bar.center = g.center;
    bar.center[2] += s * (hh + f);
    bar.half[g.axis] = f;
    bar.half[lateral] = hw + 2.0 * f;
    bar.half[2] = f;
    bars[2 + side] = bar;
  }
  return bars;
}

/// Reference point moved by a scripted track.
inline Vec3 anchor(const Geometry& g) {
  return std::visit(
      [](const auto& s) -> Vec3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Wall>) return 0.5 * (s.from + s.to);
        else return s.center;
      },
      g);
}

inline Geometry translated(Geometry g, const Vec3& offset) {
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Wall>) {
          s.from = s.from + offset;
          s.to = s.to + offset;
          s.z_min += offset[2];
          s.z_max += offset[2];
        } else {
          s.center = s.center + offset;
        }
      },
      g);
  return g;
}

/// Closest point of a solid to a query point. When the query lies inside the
/// solid, `inside` is set and `exit_normal` points out through the nearest face.
struct ClosestPoint {
  Vec3 point{};
  bool inside = false;
  Vec3 exit_normal{1.0, 0.0, 0.0};
  double distance = 0.0;
};

namespace detail {

inline ClosestPoint closest_on_box(const Box& b, Vec3 p, bool planar) {
  ClosestPoint c;
  if (planar) p[2] = b.center[2];
  const int dims = planar ? 2 : 3;
  bool inside = true;
  for (int i = 0; i < 3; ++i) {
    const double lo = b.center[i] - b.half[i], hi = b.center[i] + b.half[i];
    c.point[i] = std::clamp(p[i], lo, hi);
    if (i < dims && (p[i] <= lo || p[i] >= hi)) inside = false;
  }
  if (inside) {
    c.inside = true;
    c.point = p;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < (planar ? 2 : 3); ++i) {
      const double to_hi = b.center[i] + b.half[i] - p[i];
      const double to_lo = p[i] - (b.center[i] - b.half[i]);
      if (to_hi < best) {
        best = to_hi;
        c.exit_normal = {0, 0, 0};
        c.exit_normal[i] = 1.0;
      }
      if (to_lo < best) {
        best = to_lo;
        c.exit_normal = {0, 0, 0};
        c.exit_normal[i] = -1.0;
      }
    }
    c.distance = 0.0;
  } else {
    c.distance = norm(p - c.point);
  }
  return c;
}

inline ClosestPoint closest_on_wall(const Wall& w, Vec3 p, bool planar) {
  const double zq = planar ? 0.5 * (w.z_min + w.z_max) : p[2];
  const double dx = w.to[0] - w.from[0], dy = w.to[1] - w.from[1];
  const double len2 = dx * dx + dy * dy;
  double u = len2 > 0.0 ? ((p[0] - w.from[0]) * dx + (p[1] - w.from[1]) * dy) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const Vec3 axis_pt{w.from[0] + u * dx, w.from[1] + u * dy, std::clamp(zq, w.z_min, w.z_max)};
  Vec3 rel{p[0] - axis_pt[0], p[1] - axis_pt[1], 0.0};
  const double r = std::hypot(rel[0], rel[1]);
  const double half_t = 0.5 * w.thickness;
  ClosestPoint c;
  const bool in_z = zq > w.z_min && zq < w.z_max;
  if (r < half_t && in_z) {
    c.inside = true;
    c.point = p;
    if (r > 0.0) {
      c.exit_normal = {rel[0] / r, rel[1] / r, 0.0};
    } else if (len2 > 0.0) {
      const double l = std::sqrt(len2);
      c.exit_normal = {-dy / l, dx / l, 0.0};
    }
    return c;
  }
  Vec3 surf = axis_pt;
  if (r > 0.0) {
    const double s = std::min(half_t, r) / r;
    surf[0] += s * rel[0];
    surf[1] += s * rel[1];
  }
  c.point = surf;
  Vec3 q = p;
  if (planar) q[2] = surf[2];
  c.distance = norm(q - surf);
  return c;
}

}  // namespace detail

inline ClosestPoint closest_point(const Geometry& g, const Vec3& p, bool planar) {
  return std::visit(
      [&](const auto& s) -> ClosestPoint {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box>) {
          return detail::closest_on_box(s, p, planar);
        } else if constexpr (std::is_same_v<T, Wall>) {
          return detail::closest_on_wall(s, p, planar);
        } else {
          ClosestPoint best;
          best.distance = std::numeric_limits<double>::infinity();
          for (const Box& bar : gate_frame(s)) {
            ClosestPoint c = detail::closest_on_box(bar, p, planar);
            if (c.inside) return c;
            if (c.distance < best.distance) best = c;
          }
          return best;
        }
      },
      g);
}

/// Time-parameterised position of an obstacle's anchor; piecewise linear,
/// held constant before the first and after the last waypoint.
struct ScriptedTrack {
  struct Waypoint {
    double t = 0.0;
    Vec3 position{};
    friend bool operator==(const Waypoint&, const Waypoint&) = default;
  };
  std::vector<Waypoint> waypoints;

  Vec3 position(double t) const {
    if (waypoints.empty()) return {};
    if (t <= waypoints.front().t) return waypoints.front().position;
    if (t >= waypoints.back().t) return waypoints.back().position;
    auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                               [](double v, const Waypoint& w) { return v < w.t; });
    const Waypoint& b = *it;
    const Waypoint& a = *(it - 1);
    const double u = (t - a.t) / (b.t - a.t);
    return a.position + u * (b.position - a.position);
  }
  friend bool operator==(const ScriptedTrack&, const ScriptedTrack&) = default;
};

struct Obstacle {
  std::string id;
  Geometry geometry{Box{}};
  std::optional<ScriptedTrack> track;
  /// Presence window [active_from, active_until).
  double active_from = -std::numeric_limits<double>::infinity();
  double active_until = std::numeric_limits<double>::infinity();

  bool active(double t) const { return t >= active_from && t < active_until; }

  Geometry geometry_at(double t) const {
    if (!track) return geometry;
    return translated(geometry, track->position(t) - anchor(geometry));
  }

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// Whether a point lies inside the obstacle's solid at time t.
inline bool penetrates(const Obstacle& o, const Vec3& p, double t, bool planar) {
  if (!o.active(t)) return false;
  return closest_point(o.geometry_at(t), p, planar).inside;
}

}  // namespace ficnav
