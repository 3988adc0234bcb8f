#pragma once

// Fixed-step multi-agent world. Agents are rigid bodies with diagonal
// generalised inertia driven by
//
//   Xdd = T M^-1 (W - W_ext)
//
// where W is the controller wrench and W_ext the bubble wrench. Both are
// supplied in world axes; the net wrench is rotated into the body frame,
// clamped to the actuator limits and rotated back by T. Walls act only
// through bubbles; there is no contact solver.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ficnav/attraction_tracker.hpp"
#include "ficnav/dof.hpp"
#include "ficnav/geometry.hpp"

namespace ficnav {

enum class BubbleShape { kCircle, kRectangle };

/// Repulsive field around an agent. The repulsion magnitude is the
/// region-of-attraction profile evaluated at the penetration depth.
struct Bubble {
  BubbleShape shape = BubbleShape::kCircle;
  double radius = 1.0;
  Vec3 half_extents{};
  RoaProfileParams repulsion{};

  friend bool operator==(const Bubble&, const Bubble&) = default;
};

struct AgentLimits {
  DofVector a_max;
  DofVector v_max;
  DofVector wrench_max;
  friend bool operator==(const AgentLimits&, const AgentLimits&) = default;
};

struct AgentBody {
  std::string id;
  AgentKind kind = AgentKind::kPlanar;
  DofVector pose;
  DofVector twist;
  DofVector inertia;
  AgentLimits limits;
  std::optional<Bubble> bubble;
};

/// Per-DoF damping in the (x, y, z, roll, pitch, yaw) slots; F = -c v.
struct ViscousField {
  std::array<double, 6> c{};
  double coefficient(AgentKind kind, std::size_t dof) const { return c[spatial_slot(kind, dof)]; }
  friend bool operator==(const ViscousField&, const ViscousField&) = default;
};

inline Vec3 position_of(AgentKind kind, const DofVector& pose) {
  return kind == AgentKind::kPlanar ? Vec3{pose[0], pose[1], 0.0} : Vec3{pose[0], pose[1], pose[2]};
}

/// Applies T (body -> world) to the translational xy part; angular
/// components are treated as independent channels and pass through.
inline DofVector body_to_world(AgentKind kind, double yaw, DofVector v) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const double x = v[0], y = v[1];
  v[0] = c * x - s * y;
  v[1] = s * x + c * y;
  (void)kind;
  return v;
}

inline DofVector world_to_body(AgentKind kind, double yaw, const DofVector& v) {
  return body_to_world(kind, -yaw, v);
}

/// Generalised acceleration T M^-1 (W - W_ext) for body-frame wrenches.
inline DofVector agent_accel(const AgentBody& body, const DofVector& w, const DofVector& w_ext) {
  const std::size_t n = dof_count(body.kind);
  if (w.size() != n || w_ext.size() != n) throw InvalidInput("agent_accel: wrench dimension mismatch");
  DofVector a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = (w[i] - w_ext[i]) / body.inertia[i];
  return body_to_world(body.kind, body.pose[yaw_index(body.kind)], a);
}

/// What an agent's bubble can see at one instant.
struct Surroundings {
  std::span<const Obstacle> obstacles;
  /// Centres of all agents; the entry at self_index is skipped.
  std::span<const Vec3> agents;
  std::size_t self_index = std::numeric_limits<std::size_t>::max();
  double time = 0.0;
};

namespace detail {

inline void add_repulsion(const Bubble& b, bool planar, const Vec3& centre, double yaw,
                          const Vec3& entity, bool inside, const Vec3& exit_normal,
                          const Vec3& fallback, Vec3& total) {
  if (inside) {
    total = total + b.repulsion.f_max * exit_normal;
    return;
  }
  Vec3 sep = centre - entity;
  if (planar) sep[2] = 0.0;
  if (b.shape == BubbleShape::kCircle) {
    const double d2 = dot(sep, sep);
    if (d2 >= b.radius * b.radius) return;
    const double d = std::sqrt(d2);
    const Vec3 dir = d > 0.0 ? (1.0 / d) * sep : fallback;
    total = total + roa_force(b.repulsion, b.radius - d) * dir;
    return;
  }
  // Rectangle aligned with the body frame; exit through the nearest face.
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec3 rel_world = entity - centre;
  const Vec3 rel{c * rel_world[0] + s * rel_world[1], -s * rel_world[0] + c * rel_world[1],
                 rel_world[2]};
  const int dims = planar ? 2 : 3;
  double depth = std::numeric_limits<double>::infinity();
  int axis = 0;
  for (int i = 0; i < dims; ++i) {
    const double slack = b.half_extents[i] - std::abs(rel[i]);
    if (slack <= 0.0) return;
    if (slack < depth) {
      depth = slack;
      axis = i;
    }
  }
  Vec3 dir_body{};
  if (rel[axis] != 0.0) {
    dir_body[axis] = -sign_of(rel[axis]);
  } else {
    dir_body = {c * fallback[0] + s * fallback[1], -s * fallback[0] + c * fallback[1], fallback[2]};
  }
  const Vec3 dir{c * dir_body[0] - s * dir_body[1], s * dir_body[0] + c * dir_body[1], dir_body[2]};
  total = total + roa_force(b.repulsion, depth) * dir;
}

}  // namespace detail

/// External wrench W_ext produced by the bubble. It points toward the
/// repelling entities so that W - W_ext pushes the agent away from them.
/// Only translational components are non-zero.
inline DofVector bubble_wrench(const Bubble& bubble, AgentKind kind, const DofVector& pose,
                               const Surroundings& around) {
  const bool planar = kind == AgentKind::kPlanar;
  const Vec3 centre = position_of(kind, pose);
  const double yaw = pose[yaw_index(kind)];
  Vec3 total{};
  const double reach = bubble.shape == BubbleShape::kCircle ? bubble.radius : norm(bubble.half_extents);
  for (const Obstacle& o : around.obstacles) {
    if (!o.active(around.time)) continue;
    const ClosestPoint cp = closest_point(o.geometry_at(around.time), centre, planar);
    if (!cp.inside && cp.distance >= reach) continue;
    detail::add_repulsion(bubble, planar, centre, yaw, cp.point, cp.inside, cp.exit_normal,
                          Vec3{1.0, 0.0, 0.0}, total);
  }
  const double reach2 = reach * reach;
  for (std::size_t j = 0; j < around.agents.size(); ++j) {
    if (j == around.self_index) continue;
    Vec3 sep = centre - around.agents[j];
    if (planar) sep[2] = 0.0;
    if (dot(sep, sep) >= reach2) continue;
    // Coincident agents separate along x, in opposite senses by index order.
    const Vec3 fallback{around.self_index < j ? -1.0 : 1.0, 0.0, 0.0};
    detail::add_repulsion(bubble, planar, centre, yaw, around.agents[j], false, {}, fallback, total);
  }
  DofVector w(dof_count(kind));
  for (std::size_t i = 0; i < linear_count(kind); ++i) w[i] = -total[i];
  return w;
}

namespace detail {
struct Rk4Scratch {
  std::vector<DofVector> p0, v0, ps, vs2, vs3, vs4, k1a, k2a, k3a, k4a;
  std::vector<Vec3> centres;
  void resize(std::size_t n) {
    for (auto* v : {&p0, &v0, &ps, &vs2, &vs3, &vs4, &k1a, &k2a, &k3a, &k4a}) v->resize(n);
    centres.resize(n);
  }
};
}  // namespace detail

struct World {
  std::vector<AgentBody> agents;
  std::vector<Obstacle> obstacles;
  ViscousField viscous;
  double time = 0.0;
  std::int64_t step = 0;
  detail::Rk4Scratch scratch;
};

class SimulationHalt : public std::runtime_error {
 public:
  SimulationHalt(std::string agent, std::int64_t step)
      : std::runtime_error("simulation halted: non-finite state for agent '" + agent +
                           "' at step " + std::to_string(step)),
        agent_(std::move(agent)),
        step_(step) {}
  const std::string& agent() const { return agent_; }
  std::int64_t step() const { return step_; }

 private:
  std::string agent_;
  std::int64_t step_;
};

/// Per-agent values evaluated at the start-of-step state.
struct StepDiagnostics {
  std::vector<DofVector> accel;
  std::vector<DofVector> external;
};

namespace detail {

/// Saturated actuator plus viscous acceleration for every agent at one stage.
inline void world_accelerations(const World& w, std::span<const DofVector> wrenches,
                                const std::vector<DofVector>& pos, const std::vector<DofVector>& vel,
                                double t, std::vector<Vec3>& centres, std::vector<DofVector>& acc,
                                std::vector<DofVector>* external) {
  const std::size_t n_agents = w.agents.size();
  for (std::size_t i = 0; i < n_agents; ++i) centres[i] = position_of(w.agents[i].kind, pos[i]);
  for (std::size_t i = 0; i < n_agents; ++i) {
    const AgentBody& body = w.agents[i];
    const std::size_t n = dof_count(body.kind);
    const double yaw = pos[i][yaw_index(body.kind)];
    DofVector w_ext(n);
    if (body.bubble) {
      w_ext = bubble_wrench(*body.bubble, body.kind, pos[i],
                            Surroundings{w.obstacles, centres, i, t});
    }
    if (external) (*external)[i] = w_ext;
    DofVector net(n);
    for (std::size_t k = 0; k < n; ++k) net[k] = wrenches[i][k] - w_ext[k];
    net = world_to_body(body.kind, yaw, net);
    for (std::size_t k = 0; k < n; ++k) {
      const double lim = body.limits.wrench_max[k];
      net[k] = std::clamp(net[k], -lim, lim) / body.inertia[k];
    }
    DofVector a = body_to_world(body.kind, yaw, net);
    for (std::size_t k = 0; k < n; ++k)
      a[k] -= w.viscous.coefficient(body.kind, k) * vel[i][k] / body.inertia[k];
    acc[i] = a;
  }
}

}  // namespace detail

/// Classical RK4 over the coupled state of all agents. Controller wrenches
/// (world frame) are held across the four stages; bubble and viscous forces
/// are re-evaluated at each stage. The actuated body-frame wrench
/// W - W_ext is clamped to the agent's wrench limits.
inline void step_world(World& w, std::span<const DofVector> wrenches, double dt,
                       StepDiagnostics* diag = nullptr) {
  if (!(dt > 0.0)) throw InvalidInput("step_world: dt must be positive");
  const std::size_t n_agents = w.agents.size();
  if (wrenches.size() != n_agents) throw InvalidInput("step_world: one wrench per agent required");
  for (std::size_t i = 0; i < n_agents; ++i)
    if (wrenches[i].size() != dof_count(w.agents[i].kind))
      throw InvalidInput("step_world: wrench dimension mismatch for agent '" + w.agents[i].id + "'");

  detail::Rk4Scratch& sc = w.scratch;
  sc.resize(n_agents);
  auto &p0 = sc.p0, &v0 = sc.v0, &ps = sc.ps, &vs2 = sc.vs2, &vs3 = sc.vs3, &vs4 = sc.vs4;
  auto &k1a = sc.k1a, &k2a = sc.k2a, &k3a = sc.k3a, &k4a = sc.k4a;
  auto& centres = sc.centres;
  for (std::size_t i = 0; i < n_agents; ++i) {
    p0[i] = w.agents[i].pose;
    v0[i] = w.agents[i].twist;
  }
  if (diag) {
    diag->accel.assign(n_agents, DofVector{});
    diag->external.assign(n_agents, DofVector{});
  }
  const double t = w.time;
  detail::world_accelerations(w, wrenches, p0, v0, t, centres, k1a, diag ? &diag->external : nullptr);
  if (diag) diag->accel = k1a;

  auto stage = [&](const std::vector<DofVector>& kv, const std::vector<DofVector>& ka, double h,
                   std::vector<DofVector>& vs_out) {
    for (std::size_t i = 0; i < n_agents; ++i) {
      const std::size_t n = p0[i].size();
      ps[i] = p0[i];
      vs_out[i] = v0[i];
      for (std::size_t k = 0; k < n; ++k) {
        ps[i][k] += h * kv[i][k];
        vs_out[i][k] += h * ka[i][k];
      }
    }
  };
  stage(v0, k1a, 0.5 * dt, vs2);
  detail::world_accelerations(w, wrenches, ps, vs2, t + 0.5 * dt, centres, k2a, nullptr);
  stage(vs2, k2a, 0.5 * dt, vs3);
  detail::world_accelerations(w, wrenches, ps, vs3, t + 0.5 * dt, centres, k3a, nullptr);
  stage(vs3, k3a, dt, vs4);
  detail::world_accelerations(w, wrenches, ps, vs4, t + dt, centres, k4a, nullptr);

  for (std::size_t i = 0; i < n_agents; ++i) {
    AgentBody& body = w.agents[i];
    const std::size_t n = p0[i].size();
    for (std::size_t k = 0; k < n; ++k) {
      body.pose[k] = p0[i][k] + dt / 6.0 * (v0[i][k] + 2.0 * vs2[i][k] + 2.0 * vs3[i][k] + vs4[i][k]);
      body.twist[k] =
          v0[i][k] + dt / 6.0 * (k1a[i][k] + 2.0 * k2a[i][k] + 2.0 * k3a[i][k] + k4a[i][k]);
      if (dof_kind(body.kind, k) == DofKind::kAngular) body.pose[k] = wrap_angle(body.pose[k]);
    }
    if (!body.pose.all_finite() || !body.twist.all_finite()) throw SimulationHalt(body.id, w.step);
  }
  w.time = static_cast<double>(w.step + 1) * dt;
  ++w.step;
}

}  // namespace ficnav
