#include "harmonic/sylvester.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <unsupported/Eigen/KroneckerProduct>

#include "harmonic/operators.hpp"

namespace harmonic {

namespace {

void check_shapes(const PeriodicMatrixFunction& A, const PeriodicMatrixFunction& B,
                  const PeriodicMatrixFunction& G, const MatrixXcd& Lambda) {
  const auto n = A.rows();
  if (A.cols() != n) throw ConfigError("Sylvester: A must be square");
  if (B.rows() != n) throw ConfigError("Sylvester: B must have as many rows as A");
  if (G.cols() != n || G.rows() != B.cols()) {
    throw ConfigError("Sylvester: G must be (inputs x states)");
  }
  if (Lambda.rows() != n || Lambda.cols() != n) {
    throw ConfigError("Sylvester: Lambda must be n x n");
  }
}

void require_diagonalizable(const MatrixXcd& Lambda) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(Lambda);
  Eigen::JacobiSVD<MatrixXcd> svd(es.eigenvectors());
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-10 * s(0)) {
    throw ConfigError("Sylvester: Lambda must be diagonalizable (Jordan blocks unsupported)");
  }
}

// Nearest lattice point lambda_p + j w k to `pole`.
cplx nearest_lattice_point(cplx pole, const std::vector<cplx>& exponents, double omega,
                           double& distance) {
  distance = std::numeric_limits<double>::infinity();
  cplx best{};
  for (const cplx lp : exponents) {
    const double k = std::round((pole - lp).imag() / omega);
    const cplx candidate = lp + cplx(0.0, omega * k);
    const double d = std::abs(pole - candidate);
    if (d < distance) {
      distance = d;
      best = candidate;
    }
  }
  return best;
}

}  // namespace

VectorXcd HarmonicSylvesterSolution::stacked() const {
  const int w = 2 * m + 1;
  VectorXcd out(n * w * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = -m; k <= m; ++k) out(j * n * w + i * w + k + m) = phasor(k)(i, j);
    }
  }
  return out;
}

HarmonicSylvesterSolution solve_truncated(const PeriodicMatrixFunction& A,
                                          const PeriodicMatrixFunction& B,
                                          const PeriodicMatrixFunction& G,
                                          const MatrixXcd& Lambda, int m,
                                          const SylvesterOptions& options) {
  check_shapes(A, B, G, Lambda);
  if (m < 0) throw ConfigError("Sylvester: negative truncation order");
  require_diagonalizable(Lambda);
  const Eigen::Index n = A.rows();
  const int w = 2 * m + 1;
  const double omega = A.omega();

  if (options.floquet_exponents) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(Lambda, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx pole = es.eigenvalues()(i);
      double d = 0.0;
      const cplx hit = nearest_lattice_point(pole, *options.floquet_exponents, omega, d);
      if (d <= options.overlap_tolerance) {
        throw SpectralOverlap("Sylvester: sigma(Lambda) meets the harmonic spectrum", pole,
                              hit);
      }
    }
  }

  const PeriodicMatrixFunction Q = product(B, G, options.sampled_order);
  if (Q.available_order() < m) throw MissingPhasors(m, Q.available_order());
  const MatrixXcd H = harmonic_state_operator(A, m);

  const Eigen::Index nw = n * w;
  MatrixXcd system = Eigen::kroneckerProduct(MatrixXcd::Identity(n, n), H).eval();
  system -= Eigen::kroneckerProduct(Lambda.transpose(), MatrixXcd::Identity(nw, nw)).eval();

  std::vector<MatrixXcd> q(w);
  VectorXcd rhs(nw * n);
  for (int k = -m; k <= m; ++k) q[k + m] = Q.phasor(k);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = -m; k <= m; ++k) rhs(j * nw + i * w + k + m) = q[k + m](i, j);
    }
  }

  Eigen::PartialPivLU<MatrixXcd> lu(system);
  // The rcond estimate misses exactly zero pivots; the pivot ratio catches them.
  const VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double pivot_ratio = pivots.minCoeff() / std::max(pivots.maxCoeff(), 1e-300);
  if (!(lu.rcond() > options.singular_rcond) || !(pivot_ratio > options.singular_rcond)) {
    Eigen::ComplexEigenSolver<MatrixXcd> eh(H, false);
    Eigen::ComplexEigenSolver<MatrixXcd> el(Lambda, false);
    double best = std::numeric_limits<double>::infinity();
    cplx pole{}, hit{};
    for (Eigen::Index a = 0; a < el.eigenvalues().size(); ++a) {
      for (Eigen::Index b = 0; b < eh.eigenvalues().size(); ++b) {
        const double d = std::abs(el.eigenvalues()(a) - eh.eigenvalues()(b));
        if (d < best) {
          best = d;
          pole = el.eigenvalues()(a);
          hit = eh.eigenvalues()(b);
        }
      }
    }
    throw SpectralOverlap("Sylvester: truncated system is singular (spectral overlap)", pole,
                          hit);
  }
  const VectorXcd x = lu.solve(rhs);

  HarmonicSylvesterSolution sol;
  sol.n = n;
  sol.m = m;
  sol.period = A.period();
  sol.Lambda = Lambda;
  sol.phasors.assign(w, MatrixXcd::Zero(n, n));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = -m; k <= m; ++k) sol.phasors[k + m](i, j) = x(j * nw + i * w + k + m);
    }
  }
  sol.P = PeriodicMatrixFunction::from_table(sol.phasors, A.period());

  // Phasor equations, term by term.
  double res2 = 0.0;
  double q2 = 0.0;
  for (int k = -m; k <= m; ++k) {
    MatrixXcd r = -cplx(0.0, omega * k) * sol.phasor(k) - sol.phasor(k) * Lambda - q[k + m];
    for (int l = -m; l <= m; ++l) r += A.phasor(k - l) * sol.phasor(l);
    res2 += r.squaredNorm();
    q2 += q[k + m].squaredNorm();
  }
  sol.residuals.phasor_equation = std::sqrt(res2) / std::max(std::sqrt(q2), 1e-300);
  if (q2 == 0.0) sol.residuals.phasor_equation = std::sqrt(res2);
  if (!(sol.residuals.phasor_equation <= options.self_check_tolerance)) {
    throw NumericalError("Sylvester: self-check failed, phasor-equation residual " +
                         std::to_string(sol.residuals.phasor_equation));
  }

  // Matrix form on the central blocks, where truncation does not enter for
  // coefficients of bandwidth <= m/2.
  const MatrixXcd P_lift = toeplitz_lift(sol.P, m).dense;
  const MatrixXcd Q_lift = toeplitz_lift(Q.truncated(m), m).dense;
  MatrixXcd right = constant_lift(Lambda, m);
  right.diagonal() -= frequency_shift(n, m, omega).diagonal;
  const MatrixXcd R = H * P_lift - P_lift * right - Q_lift;
  std::vector<Eigen::Index> central;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = -m / 2; k <= m / 2; ++k) central.push_back(i * w + k + m);
  }
  double r2 = 0.0;
  double ql2 = 0.0;
  for (auto r : central) {
    for (auto c : central) {
      r2 += std::norm(R(r, c));
      ql2 += std::norm(Q_lift(r, c));
    }
  }
  sol.residuals.algebraic = ql2 > 0.0 ? std::sqrt(r2 / ql2) : std::sqrt(r2);
  return sol;
}

double differential_residual(const HarmonicSylvesterSolution& sol,
                             const PeriodicMatrixFunction& A,
                             const PeriodicMatrixFunction& B,
                             const PeriodicMatrixFunction& G, int grid) {
  if (grid < 1) throw ConfigError("differential_residual: grid must be positive");
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = sol.period * i / grid;
    const MatrixXcd P = sol.P.synthesize(t);
    const MatrixXcd dP = sol.P.synthesize_derivative(t);
    const MatrixXcd r = dP - A.evaluate(t) * P + P * sol.Lambda + B.evaluate(t) * G.evaluate(t);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

double phasor_distance(const std::vector<MatrixXcd>& a, const std::vector<MatrixXcd>& b) {
  const int ma = static_cast<int>(a.size() / 2);
  const int mb = static_cast<int>(b.size() / 2);
  const int top = std::max(ma, mb);
  double acc = 0.0;
  for (int k = -top; k <= top; ++k) {
    const bool in_a = std::abs(k) <= ma;
    const bool in_b = std::abs(k) <= mb;
    if (in_a && in_b) {
      acc += (a[k + ma] - b[k + mb]).squaredNorm();
    } else if (in_a) {
      acc += a[k + ma].squaredNorm();
    } else if (in_b) {
      acc += b[k + mb].squaredNorm();
    }
  }
  return std::sqrt(acc);
}

ConvergenceSweep convergence_sweep(const PeriodicMatrixFunction& A,
                                   const PeriodicMatrixFunction& B,
                                   const PeriodicMatrixFunction& G, const MatrixXcd& Lambda,
                                   const std::vector<int>& m_list,
                                   std::optional<int> reference_m,
                                   const SylvesterOptions& options, int residual_grid) {
  if (m_list.empty()) throw ConfigError("convergence_sweep: empty m list");
  if (!std::is_sorted(m_list.begin(), m_list.end())) {
    throw ConfigError("convergence_sweep: m list must be ascending");
  }
  const int ref = reference_m.value_or(m_list.back());

  std::vector<int> orders = m_list;
  if (std::find(orders.begin(), orders.end(), ref) == orders.end()) orders.push_back(ref);

  struct Job {
    HarmonicSylvesterSolution sol;
    double differential = 0.0;
  };
  std::vector<std::future<Job>> futures;
  for (int m : orders) {
    futures.push_back(std::async(std::launch::async, [&, m] {
      Job job{solve_truncated(A, B, G, Lambda, m, options), 0.0};
      job.differential = differential_residual(job.sol, A, B, G, residual_grid);
      job.sol.residuals.differential = job.differential;
      return job;
    }));
  }
  std::vector<Job> jobs;
  for (auto& f : futures) jobs.push_back(f.get());

  const auto& reference =
      jobs[std::find(orders.begin(), orders.end(), ref) - orders.begin()].sol;

  ConvergenceSweep out;
  out.reference_m = ref;
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    const auto& job = jobs[i];
    out.rows.push_back({m_list[i], phasor_distance(job.sol.phasors, reference.phasors),
                        job.sol.residuals.algebraic, job.differential});
    out.solutions.push_back(job.sol);
  }
  out.monotone = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    if (!(out.rows[i].delta < out.rows[i - 1].delta)) out.monotone = false;
  }
  return out;
}

}  // namespace harmonic
