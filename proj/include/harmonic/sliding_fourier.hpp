#pragma once

#include <vector>

#include "harmonic/common.hpp"

namespace harmonic {

/// Uniformly sampled real trajectory x(t_i), t_i = t0 + i * step.
struct SampledTrajectory {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<VectorXd> samples;

  double time(std::size_t i) const { return t0 + step * static_cast<double>(i); }
};

/// Time-indexed phasor vectors X(t_i) in C^{n(2m+1)}, ordered (state i, harmonic k)
/// with the state index outer, k running -m..m.
/// Samples before one full window of history are unavailable.
struct PhasorTrajectory {
  int n = 0;
  int m = 0;
  double period = 1.0;
  double t0 = 0.0;
  double step = 0.0;
  std::vector<VectorXcd> samples;
  std::vector<bool> available;

  double time(std::size_t i) const { return t0 + step * static_cast<double>(i); }
  /// X_{i,k} at sample s.
  cplx component(std::size_t s, int i, int k) const {
    return samples[s](i * (2 * m + 1) + k + m);
  }
};

/// X_{i,k}(t) = (1/T) int_{t-T}^t x_i(tau) e^{-j w k tau} dtau by trapezoidal
/// quadrature over the window; requires the step to divide T.
PhasorTrajectory sliding_fourier(const SampledTrajectory& x, double period, int m);

struct Reconstruction {
  VectorXd value;
  /// A one-sided difference was used for the X_0 derivative.
  bool lower_accuracy = false;
  double imag_residue = 0.0;
};

/// x(t) = sum_p X_p(t) e^{j w p t} + (T/2) dX_0/dt at sample index s, with the
/// derivative by central difference on the trajectory grid.
Reconstruction reconstruct(const PhasorTrajectory& X, std::size_t s);

/// Largest sampled violation of dX_k/dt = dX_0/dt e^{-j w k t} over available
/// interior samples (finite differences).
double coincidence_defect(const PhasorTrajectory& X);

}  // namespace harmonic
