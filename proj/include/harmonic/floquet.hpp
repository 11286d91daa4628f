#pragma once

#include <vector>

#include "harmonic/periodic_function.hpp"

namespace harmonic {

struct MonodromyResult {
  MatrixXd matrix;
  int steps = 0;
  /// max-entry change against the run with half as many steps.
  double halving_delta = 0.0;
  bool converged = false;
};

/// Phi(T, 0) for Phi' = A(t) Phi, Phi(0) = I, by fixed-step RK4. The step must
/// land on every breakpoint of A. Convergence is reported, not enforced.
MonodromyResult monodromy(const PeriodicMatrixFunction& A, int steps = 20000,
                          double tolerance = 1e-8);

/// Phi(t_i, 0) at t_i = i T / steps, i = 0..steps.
std::vector<MatrixXd> transition_table(const PeriodicMatrixFunction& A, int steps);

/// A(t) = V(t) J V(t)^{-1} + V'(t) V(t)^{-1} with V T-periodic and J diagonal,
/// obtained from the monodromy matrix: J = log(eig(Phi(T,0))) / T on the
/// principal branch and V(t) = Phi(t, 0) W e^{-J t}.
struct FloquetFactorization {
  MatrixXcd J;
  std::vector<cplx> exponents;
  /// Eigenvectors of the monodromy matrix, V(0) = W.
  MatrixXcd W;
  MatrixXd monodromy;
  double period = 1.0;
  double halving_delta = 0.0;
  bool monodromy_converged = false;
  /// V with an exact evaluator (cubic Hermite on the RK4 transition table) and
  /// quadrature phasors up to `phasor_order`.
  PeriodicMatrixFunction V;
  /// ||V(T) - V(0)||.
  double periodicity_defect = 0.0;
  /// ||W^{-1} Phi(T,0) W - e^{J T}||.
  double similarity_defect = 0.0;
};

struct FloquetOptions {
  int steps = 20000;
  int phasor_order = 64;
  /// Eigenvector matrices with condition number above this count as defective.
  double defective_condition = 1e10;
};

FloquetFactorization factorize(const PeriodicMatrixFunction& A,
                               const FloquetOptions& options = {});

/// {lambda_p + j w k} for every exponent and every k in `harmonics`.
std::vector<cplx> harmonic_spectrum_prediction(const FloquetFactorization& F,
                                               const std::vector<int>& harmonics);
std::vector<cplx> harmonic_spectrum_prediction(const std::vector<cplx>& exponents,
                                               double omega,
                                               const std::vector<int>& harmonics);

/// Distance from z to the nearest lattice point lambda_p + j w k.
double lattice_distance(cplx z, const std::vector<cplx>& exponents, double omega);

}  // namespace harmonic
