#pragma once

// Region-of-attraction tracker. Every DoF runs a fractal impedance channel
// whose divergence branch is the three-zone profile below: linear up to x0,
// exponential approach to f_max between x0 and xb, flat beyond xb.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ficnav/dof.hpp"
#include "ficnav/fic_core.hpp"

namespace ficnav {

struct RoaProfileParams {
  double k0 = 0.0;
  double x0 = 0.0;
  double xb = 0.0;
  double f_max = 0.0;

  double delta_f() const { return f_max - k0 * x0; }
  /// Exponential rate; the curve is within e^-20 of f_max at xb.
  double b() const { return (xb - x0) / 20.0; }

  friend bool operator==(const RoaProfileParams&, const RoaProfileParams&) = default;
};

inline double roa_force(const RoaProfileParams& p, double err) {
  const double a = std::abs(err);
  if (a < p.x0) return p.k0 * err;
  const double s = sign_of(err);
  if (a < p.xb) return s * (p.delta_f() * (1.0 - std::exp(-(a - p.x0) / p.b())) + p.k0 * p.x0);
  return s * p.f_max;
}

struct RoaProfile {
  RoaProfileParams params;

  double evaluate(double e) const { return roa_force(params, e); }
  double saturation() const { return params.f_max; }
  std::vector<double> breakpoints() const { return {params.x0, params.xb}; }
};

struct RoaDiagnostics {
  bool ok = true;
  /// One entry per violated invariant, each naming the offending field.
  std::vector<std::string> problems;
  double continuity_residual = 0.0;
  /// Profile value just below xb.
  double value_before_xb = 0.0;
  bool reaches_999_before_xb = false;
};

inline RoaDiagnostics validate_params(const RoaProfileParams& p) {
  RoaDiagnostics d;
  auto fail = [&](std::string msg) {
    d.ok = false;
    d.problems.push_back(std::move(msg));
  };
  for (auto [name, v] : {std::pair{"k0", p.k0}, {"x0", p.x0}, {"xb", p.xb}, {"f_max", p.f_max}}) {
    if (!std::isfinite(v)) fail(std::string(name) + ": must be finite");
  }
  if (!d.ok) return d;
  if (!(p.k0 > 0.0)) fail("k0: stiffness must be positive");
  if (!(p.x0 > 0.0)) fail("x0: linear-zone edge must be positive");
  if (p.xb == p.x0) {
    fail("xb: degenerate nonlinear zone (xb == x0 gives b = 0)");
  } else if (!(p.xb > p.x0)) {
    fail("xb: saturation edge must exceed x0");
  }
  if (p.delta_f() < 0.0) {
    std::ostringstream os;
    os << "f_max: delta_f negative (f_max " << p.f_max << " < k0*x0 " << p.k0 * p.x0 << ")";
    fail(os.str());
  }
  if (!d.ok) return d;

  const double linear_side = p.k0 * p.x0;
  const double curved_side = p.delta_f() * (1.0 - std::exp(-0.0)) + p.k0 * p.x0;
  d.continuity_residual = std::abs(linear_side - curved_side);
  d.value_before_xb = p.delta_f() * (1.0 - std::exp(-(p.xb - p.x0) / p.b())) + p.k0 * p.x0;
  d.reaches_999_before_xb = d.value_before_xb >= 0.999 * p.f_max;
  if (!d.reaches_999_before_xb) fail("xb: profile does not reach 99.9% of f_max before xb");
  return d;
}

struct TrackerChannel {
  RoaProfileParams params;
  FicChannelState fic;
  DofKind kind = DofKind::kLinear;
};

struct TrackerState {
  std::vector<TrackerChannel> channels;
};

inline TrackerState make_tracker(const std::vector<RoaProfileParams>& params, AgentKind agent,
                                 double hysteresis_eps = 1e-6) {
  if (params.size() != dof_count(agent)) throw InvalidInput("make_tracker: DoF count mismatch");
  TrackerState s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    TrackerChannel ch{params[i], {}, dof_kind(agent, i)};
    ch.fic.hysteresis_eps = hysteresis_eps;
    s.channels.push_back(ch);
  }
  return s;
}

/// Control wrench pulling pose x toward x_d; updates each channel's phase.
/// With fresh == false the pose is a held measurement: the phase detector
/// keeps its state and the force uses the current error, with the peak
/// raised to |error| if the error has outgrown it.
inline DofVector track_wrench(TrackerState& state, const DofVector& x_d, const DofVector& x, bool fresh = true) {
  const std::size_t n = state.channels.size();
  if (x_d.size() != n || x.size() != n)
    throw InvalidInput("track_wrench: pose dimension does not match tracker DoF count");
  DofVector w(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& ch = state.channels[i];
    const double err = dof_error(ch.kind, x_d[i], x[i]);
    if (fresh) {
      ch.fic = update_phase(ch.fic, err);
      w[i] = fic_force(ch.fic, RoaProfile{ch.params}, err);
    } else {
      if (!std::isfinite(err)) throw InvalidInput("track_wrench: non-finite error");
      FicChannelState eval = ch.fic;
      eval.x_max = std::max(eval.x_max, std::fabs(err));
      w[i] = fic_force(eval, RoaProfile{ch.params}, err);
    }
  }
  return w;
}

}  // namespace ficnav
