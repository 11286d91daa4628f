#pragma once

#include <optional>
#include <vector>

#include "harmonic/periodic_function.hpp"

namespace harmonic {

struct SylvesterResiduals {
  /// Matrix-form truncated equation on the central blocks |k|, |l| <= m/2,
  /// relative to the norm of the lifted right-hand side.
  double algebraic = 0.0;
  /// Phasor equations |k| <= m evaluated term by term, relative.
  double phasor_equation = 0.0;
  /// sup_t ||dP/dt - A P + P Lambda + B G||_F; filled by differential_residual().
  std::optional<double> differential;
};

/// Truncated solution of (A - N) P - P (Lambda (x) I - N) = B G.
struct HarmonicSylvesterSolution {
  Eigen::Index n = 0;
  int m = 0;
  double period = 1.0;
  MatrixXcd Lambda;
  /// P phasors indexed k + m.
  std::vector<MatrixXcd> phasors;
  /// Trigonometric polynomial built from `phasors`.
  PeriodicMatrixFunction P;
  SylvesterResiduals residuals;

  const MatrixXcd& phasor(int k) const { return phasors[k + m]; }
  /// col(P~_m): phasors stacked in the (row i, harmonic k) layout, column by column.
  VectorXcd stacked() const;
};

struct SylvesterOptions {
  /// Floquet exponents of A; when given, sigma(Lambda) is checked against
  /// {lambda_p + j w k} before assembling.
  std::optional<std::vector<cplx>> floquet_exponents;
  double overlap_tolerance = 1e-9;
  /// Reciprocal condition estimate below which the system is treated as singular.
  double singular_rcond = 1e-13;
  /// The phasor-equation self-check must stay below this.
  double self_check_tolerance = 1e-8;
  /// Quadrature order for B G when neither factor is a trigonometric polynomial.
  int sampled_order = 64;
};

/// Assembles (Id_n (x) (A_m - N_m) - Lambda^T (x) Id) col(P) = col(Q|_m) and
/// solves it by LU with partial pivoting.
///
/// The Kronecker arrangement acting on P from the right is Lambda^T, which is
/// what col(P Lambda) = (Lambda^T (x) Id) col(P) requires; for complex Lambda
/// the conjugate-transpose form would assign conj(Lambda) instead. The
/// phasor-equation self-check below is written independently of the assembly
/// and rejects any solution that does not satisfy
///   sum_l A_{k-l} P_l - j w k P_k - P_k Lambda = Q_k,  |k| <= m.
HarmonicSylvesterSolution solve_truncated(const PeriodicMatrixFunction& A,
                                          const PeriodicMatrixFunction& B,
                                          const PeriodicMatrixFunction& G,
                                          const MatrixXcd& Lambda, int m,
                                          const SylvesterOptions& options = {});

/// sup over a uniform grid of ||dP/dt - A P + P Lambda + B G||_F with dP/dt
/// taken exactly from the phasors.
double differential_residual(const HarmonicSylvesterSolution& sol,
                             const PeriodicMatrixFunction& A,
                             const PeriodicMatrixFunction& B,
                             const PeriodicMatrixFunction& G, int grid = 1024);

struct ConvergenceRow {
  int m = 0;
  /// ||col(P~_m - P~_ref)||_2 with P~_m zero-extended.
  double delta = 0.0;
  double algebraic = 0.0;
  double differential = 0.0;
};

struct ConvergenceSweep {
  int reference_m = 0;
  std::vector<ConvergenceRow> rows;
  std::vector<HarmonicSylvesterSolution> solutions;
  /// delta strictly decreasing along rows (diagnosed, not assumed).
  bool monotone = false;
};

/// Solves at every m in `m_list` (ascending) and at the reference order
/// (default: the largest m), concurrently.
ConvergenceSweep convergence_sweep(const PeriodicMatrixFunction& A,
                                   const PeriodicMatrixFunction& B,
                                   const PeriodicMatrixFunction& G, const MatrixXcd& Lambda,
                                   const std::vector<int>& m_list,
                                   std::optional<int> reference_m = std::nullopt,
                                   const SylvesterOptions& options = {},
                                   int residual_grid = 512);

/// ||col(a - b)||_2 after zero-extending the lower-order phasor set.
double phasor_distance(const std::vector<MatrixXcd>& a, const std::vector<MatrixXcd>& b);

}  // namespace harmonic
