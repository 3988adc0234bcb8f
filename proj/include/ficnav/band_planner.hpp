#pragma once

// Elastic band stage: pulls the desired state x_d toward the active via-point
// with a saturated spring (|F| <= M_d a_max), divides by the apparent inertia
// M_d and integrates twice, clamping the velocity before the second
// integrator.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ficnav/dof.hpp"
#include "ficnav/fic_core.hpp"

namespace ficnav {

/// kPlainSpring uses the saturated spring directly; kFractal routes it
/// through the divergence/convergence machinery of fic_core.
enum class BandMode { kPlainSpring, kFractal };

struct BandParams {
  double k_band = 0.0;
  double m_desired = 0.0;
  double a_max = 0.0;
  double v_max = 0.0;
  DofKind kind = DofKind::kLinear;

  double f_max() const { return m_desired * a_max; }
  LinearSaturatedProfile profile() const { return {k_band, f_max()}; }

  friend bool operator==(const BandParams&, const BandParams&) = default;
};

struct BandState {
  double x_d = 0.0;
  double v_d = 0.0;
  FicChannelState fic{};
};

inline void check_band_params(const BandParams& p) {
  if (!(p.k_band > 0.0) || !(p.a_max > 0.0) || !(p.v_max > 0.0) || !(p.m_desired > 0.0))
    throw InvalidInput("BandParams: k_band, m_desired, a_max and v_max must be positive");
}

inline double band_force(const BandParams& p, double x_vp, double x_d) {
  const double f = p.k_band * dof_error(p.kind, x_vp, x_d);
  return std::clamp(f, -p.f_max(), p.f_max());
}

inline BandState band_step(BandState s, const BandParams& p, double x_vp, double dt,
                           BandMode mode = BandMode::kFractal) {
  if (!(dt > 0.0) || dt > 0.01) throw InvalidInput("band_step: dt must lie in (0, 0.01] s");
  double force = 0.0;
  if (mode == BandMode::kPlainSpring) {
    force = band_force(p, x_vp, s.x_d);
  } else {
    const double err = dof_error(p.kind, x_vp, s.x_d);
    s.fic = update_phase(s.fic, err);
    force = std::clamp(fic_force(s.fic, p.profile(), err), -p.f_max(), p.f_max());
  }
  const double accel = std::clamp(force / p.m_desired, -p.a_max, p.a_max);
  s.v_d = std::clamp(s.v_d + accel * dt, -p.v_max, p.v_max);
  s.x_d += s.v_d * dt;
  if (p.kind == DofKind::kAngular) s.x_d = wrap_angle(s.x_d);
  return s;
}

/// Multi-DoF band: one independent channel per DoF.
class BandPlanner {
 public:
  BandPlanner() = default;
  BandPlanner(std::vector<BandParams> params, const DofVector& x0, BandMode mode,
              double hysteresis_eps = 1e-6)
      : params_(std::move(params)), mode_(mode) {
    if (params_.size() != x0.size()) throw InvalidInput("BandPlanner: DoF count mismatch");
    states_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      check_band_params(params_[i]);
      states_[i].x_d = x0[i];
      states_[i].fic.hysteresis_eps = hysteresis_eps;
    }
  }

  void step(const DofVector& x_vp, double dt) {
    if (x_vp.size() != states_.size()) throw InvalidInput("BandPlanner: target DoF mismatch");
    for (std::size_t i = 0; i < states_.size(); ++i)
      states_[i] = band_step(states_[i], params_[i], x_vp[i], dt, mode_);
  }

  DofVector desired() const {
    DofVector out(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) out[i] = states_[i].x_d;
    return out;
  }
  DofVector desired_rate() const {
    DofVector out(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) out[i] = states_[i].v_d;
    return out;
  }

  const std::vector<BandState>& states() const { return states_; }
  const std::vector<BandParams>& params() const { return params_; }
  BandMode mode() const { return mode_; }

 private:
  std::vector<BandParams> params_;
  std::vector<BandState> states_;
  BandMode mode_ = BandMode::kFractal;
};

}  // namespace ficnav
