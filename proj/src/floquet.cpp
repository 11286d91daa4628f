#include "harmonic/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "harmonic/integrator.hpp"

namespace harmonic {

namespace {

double step_for(const PeriodicMatrixFunction& A, int steps) {
  if (A.rows() != A.cols()) throw ConfigError("monodromy: A must be square");
  if (steps < 1) throw ConfigError("monodromy: steps must be positive");
  const double h = A.period() / steps;
  if (!breakpoints_aligned(A.breakpoints(), h)) {
    throw ConfigError("monodromy: step does not land on the breakpoints of A");
  }
  return h;
}

MatrixXd end_of_period(const PeriodicMatrixFunction& A, int steps) {
  const double h = step_for(A, steps);
  const auto rhs = [&A](double t, const MatrixXd& X) -> MatrixXd {
    return A.evaluate_real(t) * X;
  };
  MatrixXd phi = MatrixXd::Identity(A.rows(), A.cols());
  for (int i = 0; i < steps; ++i) phi = rk4_step(rhs, h * i, phi, h);
  return phi;
}

}  // namespace

MonodromyResult monodromy(const PeriodicMatrixFunction& A, int steps, double tolerance) {
  MonodromyResult out;
  out.matrix = end_of_period(A, steps);
  out.steps = steps;
  if (steps % 2 == 0 && breakpoints_aligned(A.breakpoints(), 2.0 * A.period() / steps)) {
    out.halving_delta = (out.matrix - end_of_period(A, steps / 2)).cwiseAbs().maxCoeff();
  } else {
    out.halving_delta = std::numeric_limits<double>::infinity();
  }
  out.converged = out.halving_delta < tolerance;
  return out;
}

std::vector<MatrixXd> transition_table(const PeriodicMatrixFunction& A, int steps) {
  const double h = step_for(A, steps);
  const auto rhs = [&A](double t, const MatrixXd& X) -> MatrixXd {
    return A.evaluate_real(t) * X;
  };
  std::vector<MatrixXd> table;
  table.reserve(steps + 1);
  table.push_back(MatrixXd::Identity(A.rows(), A.cols()));
  for (int i = 0; i < steps; ++i) table.push_back(rk4_step(rhs, h * i, table.back(), h));
  return table;
}

FloquetFactorization factorize(const PeriodicMatrixFunction& A, const FloquetOptions& options) {
  const int steps = options.steps;
  const double T = A.period();
  const double h = step_for(A, steps);
  const Eigen::Index n = A.rows();
  auto table = std::make_shared<const std::vector<MatrixXd>>(transition_table(A, steps));
  const MatrixXd& M = table->back();

  FloquetFactorization F;
  F.period = T;
  F.monodromy = M;
  if (steps % 2 == 0 && breakpoints_aligned(A.breakpoints(), 2.0 * h)) {
    F.halving_delta = (M - end_of_period(A, steps / 2)).cwiseAbs().maxCoeff();
  } else {
    F.halving_delta = std::numeric_limits<double>::infinity();
  }
  F.monodromy_converged = F.halving_delta < 1e-8;

  Eigen::EigenSolver<MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw NumericalError("floquet: eigen-solver failed");
  const VectorXcd mu = es.eigenvalues();
  const MatrixXcd vecs = es.eigenvectors();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&mu](Eigen::Index a, Eigen::Index b) {
    if (std::abs(mu(a).imag() - mu(b).imag()) > 1e-12) return mu(a).imag() > mu(b).imag();
    return mu(a).real() > mu(b).real();
  });

  F.W.resize(n, n);
  F.J = MatrixXcd::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const cplx m = mu(order[p]);
    if (std::abs(m) <= 1e-300) {
      throw UnsupportedFactorization("floquet: characteristic multiplier at 0");
    }
    VectorXcd w = vecs.col(order[p]);
    w /= w.norm();
    // Fix the phase so the first significant entry is real and positive.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(w(i)) > 1e-8) {
        w *= std::conj(w(i)) / std::abs(w(i));
        break;
      }
    }
    F.W.col(p) = w;
    F.J(p, p) = std::log(m) / T;
    F.exponents.push_back(F.J(p, p));
  }
  Eigen::JacobiSVD<MatrixXcd> svd(F.W);
  const auto& s = svd.singularValues();
  if (!(s(n - 1) > 0.0) || s(0) / s(n - 1) > options.defective_condition) {
    throw UnsupportedFactorization("floquet: monodromy matrix is defective (Jordan block)");
  }

  const MatrixXcd W = F.W;
  const VectorXcd lambda = F.J.diagonal();
  const auto A_real = A;
  const PeriodicMatrixFunction::Evaluator V_at = [table, W, lambda, A_real, h, T,
                                                  steps](double t) -> MatrixXcd {
    double s = std::fmod(t, T);
    if (s < 0.0) s += T;
    int i = static_cast<int>(std::floor(s / h));
    i = std::clamp(i, 0, steps - 1);
    const double tau = (s - h * i) / h;
    const MatrixXd& p0 = (*table)[i];
    const MatrixXd& p1 = (*table)[i + 1];
    MatrixXd phi;
    if (tau <= 1e-13) {
      phi = p0;
    } else if (tau >= 1.0 - 1e-13) {
      phi = p1;
    } else {
      const double lo = h * i + kStageNudge * h;
      const double hi = h * (i + 1) - kStageNudge * h;
      const MatrixXd d0 = A_real.evaluate_real(lo) * p0;
      const MatrixXd d1 = A_real.evaluate_real(hi) * p1;
      const double t2 = tau * tau;
      const double t3 = t2 * tau;
      phi = (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + tau) * h * d0 +
            (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * h * d1;
    }
    VectorXcd decay(lambda.size());
    for (Eigen::Index p = 0; p < lambda.size(); ++p) decay(p) = std::exp(-lambda(p) * s);
    return phi.cast<cplx>() * W * decay.asDiagonal();
  };

  const int K = options.phasor_order;
  F.V = phasors_of(V_at, n, n, T, K, std::max(steps, 4 * K + 4), A.breakpoints());

  VectorXcd full_turn(n);
  for (Eigen::Index p = 0; p < n; ++p) full_turn(p) = std::exp(-lambda(p) * T);
  F.periodicity_defect = (M.cast<cplx>() * W * full_turn.asDiagonal() - W).norm();
  VectorXcd mu_sorted(n);
  for (Eigen::Index p = 0; p < n; ++p) mu_sorted(p) = std::exp(lambda(p) * T);
  F.similarity_defect =
      (W.partialPivLu().solve(M.cast<cplx>() * W) - MatrixXcd(mu_sorted.asDiagonal())).norm();
  return F;
}

std::vector<cplx> harmonic_spectrum_prediction(const std::vector<cplx>& exponents,
                                               double omega,
                                               const std::vector<int>& harmonics) {
  std::vector<cplx> out;
  for (const cplx lp : exponents) {
    for (int k : harmonics) out.push_back(lp + cplx(0.0, omega * k));
  }
  return out;
}

std::vector<cplx> harmonic_spectrum_prediction(const FloquetFactorization& F,
                                               const std::vector<int>& harmonics) {
  return harmonic_spectrum_prediction(F.exponents, omega_of(F.period), harmonics);
}

double lattice_distance(cplx z, const std::vector<cplx>& exponents, double omega) {
  double best = std::numeric_limits<double>::infinity();
  for (const cplx lp : exponents) {
    const double k = std::round((z - lp).imag() / omega);
    best = std::min(best, std::abs(z - lp - cplx(0.0, omega * k)));
  }
  return best;
}

}  // namespace harmonic
