#pragma once

#include <cmath>
#include <vector>

namespace harmonic {

/// Fraction of a step by which the end-point stages are moved inside it, so
/// piecewise coefficients with a jump at a grid point are read from the side
/// belonging to the current step (Caratheodory solutions).
inline constexpr double kStageNudge = 1e-7;

/// One classical RK4 step for x' = f(t, x). Works for any state type with
/// vector-space operators (Eigen vectors and matrices, scalars).
template <class State, class Rhs>
State rk4_step(Rhs&& f, double t, const State& x, double h) {
  const double t_lo = t + kStageNudge * h;
  const double t_mid = t + 0.5 * h;
  const double t_hi = t + h - kStageNudge * h;
  const State k1 = f(t_lo, x);
  const State k2 = f(t_mid, State(x + (0.5 * h) * k1));
  const State k3 = f(t_mid, State(x + (0.5 * h) * k2));
  const State k4 = f(t_hi, State(x + h * k3));
  return State(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Number of whole steps of size h in `span`, or -1 if h does not divide it.
inline long whole_steps(double span, double h, double rel_tol = 1e-9) {
  const double ratio = span / h;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > rel_tol * std::max(1.0, ratio)) return -1;
  return static_cast<long>(rounded);
}

/// True when every breakpoint (in [0, period)) falls on the grid of step h.
inline bool breakpoints_aligned(const std::vector<double>& breakpoints, double h) {
  for (double b : breakpoints) {
    if (b != 0.0 && whole_steps(b, h) < 0) return false;
  }
  return true;
}

}  // namespace harmonic
