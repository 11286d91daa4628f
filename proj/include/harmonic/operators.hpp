#pragma once

#include <iosfwd>
#include <vector>

#include "harmonic/periodic_function.hpp"

namespace harmonic {

/// m-truncation of the block-Toeplitz lift of a periodic matrix function.
///
/// Block (i, j) is the (2m+1)x(2m+1) Toeplitz matrix with entry (r, c) equal to
/// the phasor a_{ij, r-c}, harmonic indices r, c running -m..m. Blocks are laid
/// out densely so the whole operator is one matrix of size
/// n_rows(2m+1) x n_cols(2m+1).
struct TruncatedBlockToeplitz {
  Eigen::Index n_rows = 0;
  Eigen::Index n_cols = 0;
  int m = 0;
  double period = 1.0;
  MatrixXcd dense;

  int width() const { return 2 * m + 1; }
  double omega() const { return omega_of(period); }
  auto block(Eigen::Index i, Eigen::Index j) const {
    return dense.block(i * width(), j * width(), width(), width());
  }
};

/// Id_n (x) diag(j w k, |k| <= m).
struct FrequencyShift {
  Eigen::Index n = 0;
  int m = 0;
  double omega = 2.0 * pi;
  VectorXcd diagonal;

  MatrixXcd dense() const { return diagonal.asDiagonal(); }
};

/// Requires phasors |k| <= 2m; throws MissingPhasors instead of zero-filling.
TruncatedBlockToeplitz toeplitz_lift(const PeriodicMatrixFunction& f, int m);

FrequencyShift frequency_shift(Eigen::Index n, int m, double omega);

/// B o A: the block matrix whose (i, j) block is B (x) A_ij.
MatrixXcd circ_product(const MatrixXcd& B, const TruncatedBlockToeplitz& A);

/// A_m - N_m.
MatrixXcd harmonic_state_operator(const PeriodicMatrixFunction& A, int m);

/// Lambda (x) I_{2m+1} in the (state, harmonic) layout.
MatrixXcd constant_lift(const MatrixXcd& Lambda, int m);

/// Eigenvalues of M with |Im| <= keep * omega / 2, sorted by imaginary then real
/// part. Truncation-edge eigenvalues outside the band are not trustworthy and
/// are dropped.
std::vector<cplx> central_spectrum(const MatrixXcd& M, double omega, double keep);

struct InvertibilityCertificate {
  bool invertible = false;
  double min_abs_det = 0.0;
  double argmin_t = 0.0;
  double max_abs_det = 0.0;
  double threshold = 0.0;
  /// Sign changes of det on the grid; counted only when det is real-valued.
  int det_sign_changes = 0;
  bool det_real = false;
  int grid = 0;
};

/// Pointwise test inf_t |det f(t)| > gamma with gamma = rel_threshold * max|det|
/// on a uniform grid, followed by golden-section refinement around each local
/// minimum.
InvertibilityCertificate invertibility_certificate(const PeriodicMatrixFunction& f,
                                                   int grid = 1024,
                                                   double rel_threshold = 1e-8);

/// One row per matrix row, complex entries written as re,im pairs.
void write_matrix_csv(std::ostream& out, const MatrixXcd& M);

}  // namespace harmonic
