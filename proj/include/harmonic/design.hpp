#pragma once

#include <optional>
#include <vector>

#include "harmonic/floquet.hpp"
#include "harmonic/operators.hpp"
#include "harmonic/sylvester.hpp"

namespace harmonic {

/// Periodic state feedback K(t) = G(t) P(t)^{-1} with the data it came from.
struct GainSchedule {
  /// Exact evaluator G(t) P(t)^{-1} by pointwise LU; phasors re-computed to 2m.
  PeriodicMatrixFunction K;
  PeriodicMatrixFunction G;
  PeriodicMatrixFunction P;
  MatrixXcd Lambda;
  InvertibilityCertificate certificate;
  int m = 0;
  HarmonicSylvesterSolution solution;
  /// Largest |Im K(t)| seen on the certificate grid.
  double max_imag_residue = 0.0;
  /// K synthesized from its phasors |k| <= m instead of the pointwise inverse.
  PeriodicMatrixFunction truncated_K() const { return K.truncated(m); }
};

/// Gain from a P, G pair: K(t) = G(t) P(t)^{-1} with phasors re-computed to 2m.
/// `solution` is left empty.
GainSchedule make_gain(const PeriodicMatrixFunction& P, const PeriodicMatrixFunction& G,
                       const MatrixXcd& Lambda, int m,
                       const InvertibilityCertificate& certificate);

struct DesignOptions {
  SylvesterOptions sylvester;
  int certificate_grid = 1024;
  double certificate_threshold = 1e-8;
  /// K must be real to this level when the data are real.
  double realness_tolerance = 1e-8;
  FloquetOptions floquet;
};

/// G = B^* V^{*-1}, Lambda = -J^* - alpha I, then the truncated Sylvester solve
/// and the invertibility certificate for P. Throws NotInvertible when the
/// certificate fails (truncation too coarse).
GainSchedule design_sufficient(const PeriodicMatrixFunction& A,
                               const PeriodicMatrixFunction& B, double alpha, int m,
                               const DesignOptions& options = {});
GainSchedule design_sufficient(const PeriodicMatrixFunction& A,
                               const PeriodicMatrixFunction& B, double alpha, int m,
                               const FloquetFactorization& floquet,
                               const DesignOptions& options = {});

/// G(t) = B(t)^* V(t)^{*-1} with phasors to |k| <= order.
PeriodicMatrixFunction sufficient_recipe_G(const PeriodicMatrixFunction& B,
                                           const FloquetFactorization& floquet, int order);

/// Constant C pairing conjugate Floquet exponents: columns (p, q) with
/// lambda_q = conj(lambda_p) map to e_p + e_q and j(e_p - e_q). G C is real
/// for the recipe G, so a real Lambda then gives a real P and K.
MatrixXcd conjugate_pair_basis(const std::vector<cplx>& exponents, double tolerance = 1e-8);

struct DesignOutcome {
  HarmonicSylvesterSolution solution;
  InvertibilityCertificate certificate;
  std::optional<GainSchedule> gain;
};

/// Sylvester solve for a caller-supplied G and Lambda. A failed certificate is
/// returned as diagnostics, not thrown.
DesignOutcome design_direct(const PeriodicMatrixFunction& A, const PeriodicMatrixFunction& B,
                            const PeriodicMatrixFunction& G, const MatrixXcd& Lambda, int m,
                            const DesignOptions& options = {});

struct RealRecipeOutcome {
  DesignOutcome outcome;
  /// Real mixing applied after the pair basis: G_real = G C M.
  MatrixXcd mixing;
  double angle = 0.0;
  bool reflected = false;
  /// min |det P| / max |det P| of the selected candidate.
  double det_ratio = 0.0;
};

/// Real-valued design for a real Lambda from a recipe G with conjugate-paired
/// columns. Each pair block of M is the same rotation (or reflection) by an
/// angle on a uniform grid of `angles` points in [0, pi); the candidate with the
/// largest det ratio is returned.
RealRecipeOutcome design_real_recipe(const PeriodicMatrixFunction& A,
                                     const PeriodicMatrixFunction& B,
                                     const PeriodicMatrixFunction& G, const MatrixXcd& Lambda,
                                     const std::vector<cplx>& exponents, int m, int angles = 24,
                                     const DesignOptions& options = {});

/// Like design_direct but throws NotInvertible instead of returning diagnostics.
GainSchedule require_gain(const DesignOutcome& outcome);

struct PoleCheckReport {
  std::vector<cplx> central_eigenvalues;
  /// Max distance from a central eigenvalue to sigma(Lambda) + j w k.
  double max_deviation = 0.0;
  /// Central-band half-width in harmonics used for the comparison.
  double keep = 0.0;
};

/// Eigenvalues of A_m - N_m - B_m K_m in the central band against sigma(Lambda) + j w Z.
PoleCheckReport closed_loop_pole_check(const GainSchedule& gain,
                                       const PeriodicMatrixFunction& A,
                                       const PeriodicMatrixFunction& B, int m,
                                       double keep = 6.0);

struct HarmonicEquilibrium {
  int m = 0;
  /// Phasor vectors in the (state, harmonic) layout.
  VectorXcd X_ref;
  VectorXcd U_ref;
  /// Trigonometric polynomials n x 1 and inputs x 1.
  PeriodicMatrixFunction x_ref;
  PeriodicMatrixFunction u_ref;
  /// ||(A_m - N_m) X + B_m U|| on the central rows.
  double residual = 0.0;
  double smallest_singular_value = 0.0;
  /// nearest_equilibrium only.
  double distance = 0.0;
  bool rank_deficient = false;
};

/// Phasor vector of a column function, |k| <= m, (row, harmonic) layout.
VectorXcd phasor_vector(const PeriodicMatrixFunction& f, int m);
/// Column trigonometric polynomial from a (row, harmonic) phasor vector.
PeriodicMatrixFunction from_phasor_vector(const VectorXcd& X, Eigen::Index rows, int m,
                                          double period);

/// X_ref = -(A_m - N_m)^{-1} B_m U_ref. Throws NumericalError near resonance.
HarmonicEquilibrium harmonic_equilibrium(const PeriodicMatrixFunction& A,
                                         const PeriodicMatrixFunction& B,
                                         const VectorXcd& U_ref, int m,
                                         double resonance_tolerance = 1e-10);

/// argmin_U ||X_d - X_ref(U)||_2 subject to the harmonic equilibrium.
HarmonicEquilibrium nearest_equilibrium(const PeriodicMatrixFunction& A,
                                        const PeriodicMatrixFunction& B,
                                        const VectorXcd& X_d, int m);

/// Smallest eigenvalue of int_0^t e^{H s} B_m B_m^* e^{H^* s} ds with
/// H = A_m - N_m. A finite-dimensional indicator only.
double controllability_heuristic(const PeriodicMatrixFunction& A,
                                 const PeriodicMatrixFunction& B, int m, double horizon,
                                 int panels = 64);

struct GramianReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool passes = false;
};

/// Observability of (G, Lambda) through the truncated Gramian
/// int_0^t e^{L^* s} G_m^* G_m e^{L s} ds, L = Lambda (x) I - N. Passes when
/// the smallest eigenvalue exceeds 1e-10 of the largest.
GramianReport observability_heuristic(const PeriodicMatrixFunction& G,
                                      const MatrixXcd& Lambda, int m, double horizon,
                                      int panels = 64);

}  // namespace harmonic
