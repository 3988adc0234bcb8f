#pragma once

// Mono-dimensional fractal impedance controller.
//
// Each DoF runs an attractor that alternates between a divergence phase
// (error magnitude growing, force follows an arbitrary bounded odd profile)
// and a convergence phase (error shrinking, force is a linear spring centred
// at half the peak displacement). Starting from rest at the peak, the
// convergence spring returns the error to zero with zero velocity.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ficnav/dof.hpp"

namespace ficnav {

enum class FicPhase { kDivergence, kConvergence };

struct FicChannelState {
  FicPhase phase = FicPhase::kConvergence;
  /// Peak |error| of the current attractor cycle.
  double x_max = 0.0;
  double prev_abs_err = 0.0;
  /// Sign of the error at the divergence peak; orients the convergence spring.
  double peak_sign = 1.0;
  /// Sign of the last non-zero error, used for zero-crossing detection.
  double prev_sign = 0.0;
  double hysteresis_eps = 1e-6;
  double zero_tol = 1e-12;

  friend bool operator==(const FicChannelState&, const FicChannelState&) = default;
};

/// Bounded, odd, monotone force law F(e).
template <class P>
concept ForceProfile = requires(const P& p, double e) {
  { p.evaluate(e) } -> std::convertible_to<double>;
  { p.saturation() } -> std::convertible_to<double>;
};

/// F(e) = clamp(k e, -f_max, f_max).
struct LinearSaturatedProfile {
  double stiffness = 0.0;
  double f_max = 0.0;

  double evaluate(double e) const { return std::clamp(stiffness * e, -f_max, f_max); }
  double saturation() const { return f_max; }
  std::vector<double> breakpoints() const {
    if (stiffness <= 0.0 || !std::isfinite(f_max)) return {};
    return {f_max / stiffness};
  }
};

/// Advances the phase detector with a new error sample.
inline FicChannelState update_phase(FicChannelState s, double err) {
  if (!std::isfinite(err)) throw InvalidInput("update_phase: non-finite error");
  const double a = std::abs(err);
  const double sgn = sign_of(err);
  const bool crossed = a < s.zero_tol || (s.prev_sign != 0.0 && sgn != 0.0 && sgn != s.prev_sign);
  const bool growing = a > s.prev_abs_err + s.hysteresis_eps || a > s.x_max;
  const bool shrinking = a < s.prev_abs_err - s.hysteresis_eps;

  if (crossed) {
    // New attractor cycle starting from the current (small) error.
    s.x_max = a;
    s.phase = FicPhase::kConvergence;
    if (sgn != 0.0) s.peak_sign = sgn;
  } else if (growing) {
    // Re-entering divergence starts a new cycle; its peak is measured from here.
    s.x_max = s.phase == FicPhase::kDivergence ? std::max(s.x_max, a) : a;
    s.phase = FicPhase::kDivergence;
    s.peak_sign = sgn;
  } else if (shrinking) {
    s.phase = FicPhase::kConvergence;
  } else if (s.phase == FicPhase::kDivergence) {
    s.x_max = std::max(s.x_max, a);
  }
  s.prev_abs_err = a;
  if (sgn != 0.0) s.prev_sign = sgn;
  return s;
}

/// Controller force for an error already passed through update_phase.
template <ForceProfile P>
double fic_force(const FicChannelState& s, const P& profile, double err) {
  if (s.phase == FicPhase::kDivergence) return profile.evaluate(err);
  if (s.x_max <= 0.0) return 0.0;
  const double k = std::abs(profile.evaluate(s.x_max)) / s.x_max;
  return s.peak_sign * k * (2.0 * std::abs(err) - s.x_max);
}

/// Integral of the profile from 0 to |e|, split at the profile's kinks.
template <ForceProfile P>
double profile_work(const P& profile, double e) {
  const double end = std::abs(e);
  if (end == 0.0) return 0.0;
  std::vector<double> cuts{0.0};
  if constexpr (requires { profile.breakpoints(); }) {
    for (double b : profile.breakpoints())
      if (b > 0.0 && b < end) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(end);
  auto f = [&](double x) { return profile.evaluate(x); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr double tol = 1e-9, abs_tol = 1e-15;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    // Single pass first: the adaptive recursion never settles on tiny intervals.
    double err = 0.0, l1 = 0.0;
    const double once = GK::integrate(f, cuts[i], cuts[i + 1], 0, tol, &err, &l1);
    total += err <= std::max(tol * l1, abs_tol) ? once : GK::integrate(f, cuts[i], cuts[i + 1], 15, tol);
  }
  return total;
}

/// Potential energy held by the active branch at error e.
template <ForceProfile P>
double stored_energy(const P& profile, const FicChannelState& s, double err) {
  const double a = std::abs(err);
  if (s.phase == FicPhase::kDivergence) return profile_work(profile, a);
  if (s.x_max <= 0.0) return 0.0;
  const double k = std::abs(profile.evaluate(s.x_max)) / s.x_max;
  return profile_work(profile, s.x_max) + k * a * (a - s.x_max);
}

}  // namespace ficnav
