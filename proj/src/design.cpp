#include "harmonic/design.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace harmonic {

namespace {

constexpr int kRecipeResolution = 4096;

int resolution_for(int order) { return std::max(1024, 4 * order + 4); }

void require_real(const GainSchedule& g, const DesignOptions& options) {
  if (g.max_imag_residue > options.realness_tolerance *
                               std::max(1.0, g.K.phasor(0).cwiseAbs().maxCoeff())) {
    throw NumericalError("design: K(t) is not real-valued, imaginary residue " +
                         std::to_string(g.max_imag_residue));
  }
}

}  // namespace

GainSchedule make_gain(const PeriodicMatrixFunction& P, const PeriodicMatrixFunction& G,
                       const MatrixXcd& Lambda, int m,
                       const InvertibilityCertificate& certificate) {
  const PeriodicMatrixFunction::Evaluator gain = [G, P](double t) -> MatrixXcd {
    const MatrixXcd Pt = P.evaluate(t);
    // K P = G, solved from the right.
    return Pt.transpose().partialPivLu().solve(G.evaluate(t).transpose()).transpose();
  };
  GainSchedule out;
  out.G = G;
  out.P = P;
  out.Lambda = Lambda;
  out.certificate = certificate;
  out.m = m;
  out.K = phasors_of(gain, G.rows(), P.cols(), P.period(), 2 * m, resolution_for(2 * m));
  const int grid = std::max(certificate.grid, 64);
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    worst = std::max(worst, max_imag(gain(P.period() * i / grid)));
  }
  out.max_imag_residue = worst;
  return out;
}

namespace {

GainSchedule assemble_gain(const HarmonicSylvesterSolution& sol,
                           const PeriodicMatrixFunction& G,
                           const InvertibilityCertificate& certificate) {
  GainSchedule out = make_gain(sol.P, G, sol.Lambda, sol.m, certificate);
  out.solution = sol;
  return out;
}

}  // namespace

PeriodicMatrixFunction sufficient_recipe_G(const PeriodicMatrixFunction& B,
                                           const FloquetFactorization& floquet, int order) {
  const PeriodicMatrixFunction V = floquet.V;
  const PeriodicMatrixFunction::Evaluator g = [B, V](double t) -> MatrixXcd {
    const MatrixXcd Vh = V.evaluate(t).adjoint();
    // G V^* = B^*.
    return Vh.transpose().partialPivLu().solve(B.evaluate(t).conjugate()).transpose();
  };
  return phasors_of(g, B.cols(), B.rows(), B.period(), order,
                    std::max(kRecipeResolution, 4 * order + 4), B.breakpoints());
}

MatrixXcd conjugate_pair_basis(const std::vector<cplx>& exponents, double tolerance) {
  const auto n = static_cast<Eigen::Index>(exponents.size());
  MatrixXcd C = MatrixXcd::Identity(n, n);
  std::vector<bool> used(exponents.size(), false);
  for (Eigen::Index p = 0; p < n; ++p) {
    if (used[p]) continue;
    used[p] = true;
    const cplx lp = exponents[p];
    const double scale = std::max(1.0, std::abs(lp));
    if (std::abs(lp.imag()) <= tolerance * scale) continue;
    for (Eigen::Index q = p + 1; q < n; ++q) {
      if (used[q] || std::abs(exponents[q] - std::conj(lp)) > tolerance * scale) continue;
      used[q] = true;
      C(p, p) = 1.0;
      C(q, p) = 1.0;
      C(p, q) = cplx(0.0, 1.0);
      C(q, q) = cplx(0.0, -1.0);
      break;
    }
  }
  return C;
}

GainSchedule design_sufficient(const PeriodicMatrixFunction& A,
                               const PeriodicMatrixFunction& B, double alpha, int m,
                               const FloquetFactorization& floquet,
                               const DesignOptions& options) {
  const Eigen::Index n = A.rows();
  const MatrixXcd Lambda = -floquet.J.adjoint() - alpha * MatrixXcd::Identity(n, n);
  const PeriodicMatrixFunction G = sufficient_recipe_G(B, floquet, 2 * m).truncated(2 * m);

  SylvesterOptions sopt = options.sylvester;
  sopt.floquet_exponents = floquet.exponents;
  const auto sol = solve_truncated(A, B, G, Lambda, m, sopt);
  const auto cert = invertibility_certificate(sol.P, options.certificate_grid,
                                              options.certificate_threshold);
  if (!cert.invertible) {
    throw NotInvertible("design: P(t) is not invertible at truncation order " +
                            std::to_string(m) + "; increase m",
                        cert.min_abs_det, cert.argmin_t);
  }
  GainSchedule out = assemble_gain(sol, G, cert);
  require_real(out, options);
  return out;
}

GainSchedule design_sufficient(const PeriodicMatrixFunction& A,
                               const PeriodicMatrixFunction& B, double alpha, int m,
                               const DesignOptions& options) {
  return design_sufficient(A, B, alpha, m, factorize(A, options.floquet), options);
}

DesignOutcome design_direct(const PeriodicMatrixFunction& A, const PeriodicMatrixFunction& B,
                            const PeriodicMatrixFunction& G, const MatrixXcd& Lambda, int m,
                            const DesignOptions& options) {
  DesignOutcome out;
  out.solution = solve_truncated(A, B, G, Lambda, m, options.sylvester);
  out.certificate = invertibility_certificate(out.solution.P, options.certificate_grid,
                                              options.certificate_threshold);
  if (out.certificate.invertible) {
    const PeriodicMatrixFunction Gm =
        G.bandlimited() ? G : G.materialized(2 * m).truncated(2 * m);
    out.gain = assemble_gain(out.solution, Gm, out.certificate);
  }
  return out;
}

RealRecipeOutcome design_real_recipe(const PeriodicMatrixFunction& A,
                                     const PeriodicMatrixFunction& B,
                                     const PeriodicMatrixFunction& G, const MatrixXcd& Lambda,
                                     const std::vector<cplx>& exponents, int m, int angles,
                                     const DesignOptions& options) {
  if (Lambda.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw ConfigError("design_real_recipe: Lambda must be real");
  }
  if (angles < 1) throw ConfigError("design_real_recipe: angles must be positive");
  const MatrixXcd C = conjugate_pair_basis(exponents);
  const Eigen::Index n = C.rows();
  // Pair blocks are the columns where C is not the identity.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = p + 1; q < n; ++q) {
      if (C(q, p) != cplx(0.0)) pairs.emplace_back(p, q);
    }
  }
  std::optional<RealRecipeOutcome> best;
  const int passes = pairs.empty() ? 1 : 2;
  for (int reflect = 0; reflect < passes; ++reflect) {
    for (int i = 0; i < (pairs.empty() ? 1 : angles); ++i) {
      const double th = pi * i / angles;
      MatrixXd M = MatrixXd::Identity(n, n);
      // Rotation [c -s; s c] or reflection [c s; s -c] in each pair block.
      const double c = std::cos(th);
      const double sn = std::sin(th);
      for (const auto& [p, q] : pairs) {
        M(p, p) = c;
        M(q, p) = sn;
        M(p, q) = reflect ? sn : -sn;
        M(q, q) = reflect ? -c : c;
      }
      const MatrixXcd mix = C * M.cast<cplx>();
      const auto Gr = product(G, PeriodicMatrixFunction::constant(mix, G.period()));
      auto outcome = design_direct(A, B, Gr, Lambda, m, options);
      const auto& cert = outcome.certificate;
      const double ratio = cert.max_abs_det > 0.0 ? cert.min_abs_det / cert.max_abs_det : 0.0;
      if (!best || ratio > best->det_ratio) {
        best = RealRecipeOutcome{std::move(outcome), mix, th, reflect == 1, ratio};
      }
    }
  }
  if (best->outcome.gain) require_real(*best->outcome.gain, options);
  return *best;
}

GainSchedule require_gain(const DesignOutcome& outcome) {
  if (!outcome.gain) {
    throw NotInvertible("design: P(t) is not invertible", outcome.certificate.min_abs_det,
                        outcome.certificate.argmin_t);
  }
  return *outcome.gain;
}

PoleCheckReport closed_loop_pole_check(const GainSchedule& gain,
                                       const PeriodicMatrixFunction& A,
                                       const PeriodicMatrixFunction& B, int m, double keep) {
  const MatrixXcd H = harmonic_state_operator(A, m);
  const MatrixXcd Bm = toeplitz_lift(B, m).dense;
  const MatrixXcd Km = toeplitz_lift(gain.K, m).dense;
  PoleCheckReport out;
  out.keep = keep;
  out.central_eigenvalues = central_spectrum(H - Bm * Km, A.omega(), keep);
  Eigen::ComplexEigenSolver<MatrixXcd> es(gain.Lambda, false);
  const std::vector<cplx> poles(es.eigenvalues().data(),
                                es.eigenvalues().data() + es.eigenvalues().size());
  for (const cplx z : out.central_eigenvalues) {
    out.max_deviation = std::max(out.max_deviation, lattice_distance(z, poles, A.omega()));
  }
  return out;
}

VectorXcd phasor_vector(const PeriodicMatrixFunction& f, int m) {
  if (f.cols() != 1) throw ConfigError("phasor_vector: column function expected");
  const int w = 2 * m + 1;
  VectorXcd out(f.rows() * w);
  for (int k = -m; k <= m; ++k) {
    const MatrixXcd p = f.phasor(k);
    for (Eigen::Index i = 0; i < f.rows(); ++i) out(i * w + k + m) = p(i, 0);
  }
  return out;
}

PeriodicMatrixFunction from_phasor_vector(const VectorXcd& X, Eigen::Index rows, int m,
                                          double period) {
  const int w = 2 * m + 1;
  if (X.size() != rows * w) throw ConfigError("from_phasor_vector: size mismatch");
  std::vector<MatrixXcd> table(w, MatrixXcd::Zero(rows, 1));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (int k = -m; k <= m; ++k) table[k + m](i, 0) = X(i * w + k + m);
  }
  return PeriodicMatrixFunction::from_table(std::move(table), period);
}

namespace {

double central_residual(const MatrixXcd& H, const MatrixXcd& Bm, const VectorXcd& X,
                        const VectorXcd& U, Eigen::Index n, int m) {
  const VectorXcd r = H * X + Bm * U;
  const int w = 2 * m + 1;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = -m / 2; k <= m / 2; ++k) acc += std::norm(r(i * w + k + m));
  }
  return std::sqrt(acc);
}

HarmonicEquilibrium finish(const PeriodicMatrixFunction& A, const PeriodicMatrixFunction& B,
                           const MatrixXcd& H, const MatrixXcd& Bm, VectorXcd X, VectorXcd U,
                           int m) {
  HarmonicEquilibrium out;
  out.m = m;
  out.residual = central_residual(H, Bm, X, U, A.rows(), m);
  out.x_ref = from_phasor_vector(X, A.rows(), m, A.period());
  out.u_ref = from_phasor_vector(U, B.cols(), m, A.period());
  out.X_ref = std::move(X);
  out.U_ref = std::move(U);
  return out;
}

}  // namespace

HarmonicEquilibrium harmonic_equilibrium(const PeriodicMatrixFunction& A,
                                         const PeriodicMatrixFunction& B,
                                         const VectorXcd& U_ref, int m,
                                         double resonance_tolerance) {
  const MatrixXcd H = harmonic_state_operator(A, m);
  const MatrixXcd Bm = toeplitz_lift(B, m).dense;
  if (U_ref.size() != Bm.cols()) throw ConfigError("harmonic_equilibrium: U_ref size");
  Eigen::JacobiSVD<MatrixXcd> svd(H);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= resonance_tolerance * s(0)) {
    throw NumericalError("harmonic_equilibrium: A_m - N_m is near-singular (resonance), "
                         "smallest singular value " + std::to_string(smin));
  }
  const VectorXcd X = -H.partialPivLu().solve(Bm * U_ref);
  auto out = finish(A, B, H, Bm, X, U_ref, m);
  out.smallest_singular_value = smin;
  return out;
}

HarmonicEquilibrium nearest_equilibrium(const PeriodicMatrixFunction& A,
                                        const PeriodicMatrixFunction& B,
                                        const VectorXcd& X_d, int m) {
  const MatrixXcd H = harmonic_state_operator(A, m);
  const MatrixXcd Bm = toeplitz_lift(B, m).dense;
  if (X_d.size() != H.rows()) throw ConfigError("nearest_equilibrium: X_d size");
  const MatrixXcd M = -H.partialPivLu().solve(Bm);
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(M);
  const VectorXcd U = cod.solve(X_d);
  const VectorXcd X = M * U;
  Eigen::JacobiSVD<MatrixXcd> svd(H);
  auto out = finish(A, B, H, Bm, X, U, m);
  out.smallest_singular_value = svd.singularValues()(svd.singularValues().size() - 1);
  out.distance = (X_d - X).norm();
  out.rank_deficient = cod.rank() < M.cols();
  return out;
}

namespace {

// Simpson rule for int_0^t E(s) C E(s)^* ds with E(s) = e^{M s}.
MatrixXcd gramian(const MatrixXcd& M, const MatrixXcd& C, double horizon, int panels) {
  if (panels < 1) throw ConfigError("gramian: panels must be positive");
  const int nodes = 2 * panels + 1;
  const double h = horizon / (nodes - 1);
  const MatrixXcd step = (M * h).exp();
  MatrixXcd E = MatrixXcd::Identity(M.rows(), M.cols());
  MatrixXcd acc = MatrixXcd::Zero(M.rows(), M.rows());
  for (int j = 0; j < nodes; ++j) {
    const double w = (j == 0 || j == nodes - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += w * (E * C * E.adjoint());
    E = step * E;
  }
  return acc * (h / 3.0);
}

}  // namespace

double controllability_heuristic(const PeriodicMatrixFunction& A,
                                 const PeriodicMatrixFunction& B, int m, double horizon,
                                 int panels) {
  const MatrixXcd H = harmonic_state_operator(A, m);
  const MatrixXcd Bm = toeplitz_lift(B, m).dense;
  const MatrixXcd W = gramian(H, Bm * Bm.adjoint(), horizon, panels);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (W + W.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

GramianReport observability_heuristic(const PeriodicMatrixFunction& G,
                                      const MatrixXcd& Lambda, int m, double horizon,
                                      int panels) {
  MatrixXcd L = constant_lift(Lambda, m);
  L.diagonal() -= frequency_shift(Lambda.rows(), m, G.omega()).diagonal;
  const MatrixXcd Gm = toeplitz_lift(G, m).dense;
  const MatrixXcd W = gramian(L.adjoint(), Gm.adjoint() * Gm, horizon, panels);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (W + W.adjoint()), Eigen::EigenvaluesOnly);
  GramianReport out;
  out.min_eigenvalue = es.eigenvalues()(0);
  out.max_eigenvalue = es.eigenvalues()(es.eigenvalues().size() - 1);
  out.passes = out.max_eigenvalue > 0.0 && out.min_eigenvalue > 1e-10 * out.max_eigenvalue;
  return out;
}

}  // namespace harmonic
