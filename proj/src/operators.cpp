#include "harmonic/operators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <unsupported/Eigen/KroneckerProduct>

namespace harmonic {

TruncatedBlockToeplitz toeplitz_lift(const PeriodicMatrixFunction& f, int m) {
  if (m < 0) throw ConfigError("toeplitz_lift: negative truncation order");
  if (f.available_order() < 2 * m) throw MissingPhasors(2 * m, f.available_order());
  TruncatedBlockToeplitz out;
  out.n_rows = f.rows();
  out.n_cols = f.cols();
  out.m = m;
  out.period = f.period();
  const int w = 2 * m + 1;
  out.dense = MatrixXcd::Zero(f.rows() * w, f.cols() * w);
  for (int d = -2 * m; d <= 2 * m; ++d) {
    const MatrixXcd a = f.phasor(d);
    for (int r = std::max(0, d); r < w && r - d < w; ++r) {
      const int c = r - d;
      for (Eigen::Index i = 0; i < f.rows(); ++i) {
        for (Eigen::Index j = 0; j < f.cols(); ++j) out.dense(i * w + r, j * w + c) = a(i, j);
      }
    }
  }
  return out;
}

FrequencyShift frequency_shift(Eigen::Index n, int m, double omega) {
  FrequencyShift out;
  out.n = n;
  out.m = m;
  out.omega = omega;
  const int w = 2 * m + 1;
  out.diagonal.resize(n * w);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = -m; k <= m; ++k) out.diagonal(i * w + k + m) = cplx(0.0, omega * k);
  }
  return out;
}

MatrixXcd circ_product(const MatrixXcd& B, const TruncatedBlockToeplitz& A) {
  const int w = A.width();
  const Eigen::Index br = B.rows() * w;
  const Eigen::Index bc = B.cols() * w;
  MatrixXcd out(A.n_rows * br, A.n_cols * bc);
  for (Eigen::Index i = 0; i < A.n_rows; ++i) {
    for (Eigen::Index j = 0; j < A.n_cols; ++j) {
      out.block(i * br, j * bc, br, bc) =
          Eigen::kroneckerProduct(B, MatrixXcd(A.block(i, j))).eval();
    }
  }
  return out;
}

MatrixXcd harmonic_state_operator(const PeriodicMatrixFunction& A, int m) {
  if (A.rows() != A.cols()) throw ConfigError("harmonic_state_operator: A must be square");
  const auto lift = toeplitz_lift(A, m);
  MatrixXcd out = lift.dense;
  out.diagonal() -= frequency_shift(A.rows(), m, A.omega()).diagonal;
  return out;
}

MatrixXcd constant_lift(const MatrixXcd& Lambda, int m) {
  return Eigen::kroneckerProduct(Lambda, MatrixXcd::Identity(2 * m + 1, 2 * m + 1)).eval();
}

std::vector<cplx> central_spectrum(const MatrixXcd& M, double omega, double keep) {
  if (M.rows() != M.cols()) throw ConfigError("central_spectrum: matrix must be square");
  Eigen::ComplexEigenSolver<MatrixXcd> solver(M, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-solver failed");
  const double band = keep * omega / 2.0;
  std::vector<cplx> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const cplx v = solver.eigenvalues()(i);
    if (std::abs(v.imag()) <= band + 1e-12) out.push_back(v);
  }
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    if (std::abs(a.imag() - b.imag()) > 1e-9) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  return out;
}

namespace {

// Golden-section minimisation of g on [a, b].
double golden_min(const std::function<double(double)>& g, double a, double b, int iters) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int i = 0; i < iters; ++i) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  return gc < gd ? c : d;
}

}  // namespace

InvertibilityCertificate invertibility_certificate(const PeriodicMatrixFunction& f, int grid,
                                                   double rel_threshold) {
  if (f.rows() != f.cols()) throw ConfigError("invertibility_certificate: f must be square");
  if (grid < 3) throw ConfigError("invertibility_certificate: grid too small");
  const double T = f.period();
  const double h = T / grid;
  std::vector<cplx> det(grid);
  for (int i = 0; i < grid; ++i) det[i] = f.evaluate(h * i).determinant();

  InvertibilityCertificate out;
  out.grid = grid;
  double max_abs = 0.0;
  double max_imag_det = 0.0;
  for (const auto& d : det) {
    max_abs = std::max(max_abs, std::abs(d));
    max_imag_det = std::max(max_imag_det, std::abs(d.imag()));
  }
  out.max_abs_det = max_abs;
  out.det_real = max_imag_det <= 1e-8 * std::max(max_abs, 1e-300);
  if (out.det_real) {
    for (int i = 0; i < grid; ++i) {
      const double a = det[i].real();
      const double b = det[(i + 1) % grid].real();
      if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) ++out.det_sign_changes;
    }
  }

  const auto abs_det = [&f](double t) { return std::abs(f.evaluate(t).determinant()); };
  out.min_abs_det = std::abs(det[0]);
  out.argmin_t = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double here = std::abs(det[i]);
    const double prev = std::abs(det[(i + grid - 1) % grid]);
    const double next = std::abs(det[(i + 1) % grid]);
    if (here <= prev && here <= next) {
      const double t = golden_min(abs_det, h * (i - 1), h * (i + 1), 60);
      const double v = std::min(abs_det(t), here);
      if (v < out.min_abs_det) {
        out.min_abs_det = v;
        out.argmin_t = v == here ? h * i : std::fmod(t + T, T);
      }
    }
  }
  out.threshold = rel_threshold * max_abs;
  out.invertible = max_abs > 0.0 && out.min_abs_det > out.threshold;
  return out;
}

void write_matrix_csv(std::ostream& out, const MatrixXcd& M) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << M(i, j).real() << ',' << M(i, j).imag();
    }
    out << '\n';
  }
}

}  // namespace harmonic
