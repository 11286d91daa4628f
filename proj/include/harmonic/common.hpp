#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace harmonic {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong shapes, schema violations, bad grids.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A well-posed computation that failed numerically.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A phasor of order |k| was requested that the function cannot supply.
class MissingPhasors : public Error {
 public:
  MissingPhasors(int requested, int available)
      : Error("phasor of order " + std::to_string(requested) +
              " requested but only |k| <= " + std::to_string(available) +
              " is available; materialize a higher order first"),
        requested_order(requested),
        available_order(available) {}
  int requested_order;
  int available_order;
};

/// Quadrature grid too coarse for the requested harmonic order.
class AliasingError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// sigma(Lambda) meets the harmonic spectrum {lambda_p + j w k}.
class SpectralOverlap : public NumericalError {
 public:
  SpectralOverlap(const std::string& what, cplx pole, cplx harmonic_eigenvalue)
      : NumericalError(what), pole(pole), harmonic_eigenvalue(harmonic_eigenvalue) {}
  cplx pole;
  cplx harmonic_eigenvalue;
};

/// A periodic matrix function that should be pointwise invertible is not.
class NotInvertible : public NumericalError {
 public:
  NotInvertible(const std::string& what, double min_abs_det, double argmin_t)
      : NumericalError(what), min_abs_det(min_abs_det), argmin_t(argmin_t) {}
  double min_abs_det;
  double argmin_t;
};

/// Floquet factorization outside the supported (diagonalizable) class.
class UnsupportedFactorization : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline double omega_of(double period) { return 2.0 * pi / period; }

/// Largest |Im| entry; used to report (not hide) imaginary residue.
inline double max_imag(const MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.imag().cwiseAbs().maxCoeff();
}

}  // namespace harmonic
