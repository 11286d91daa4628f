#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "harmonic/common.hpp"

namespace harmonic {

/// A T-periodic matrix-valued function held through its Fourier phasors
///
///   f(t) = sum_k phasor(k) e^{j w k t},   w = 2 pi / T.
///
/// Phasors come from one of three sources: an exact finite table (the
/// function is a trigonometric polynomial), a closed-form per-k formula
/// (infinite bandwidth, any order can be materialized), or quadrature up to a
/// fixed order (phasors beyond it are unknown and requesting them throws).
/// An exact time-domain evaluator can be attached; otherwise evaluation is the
/// finite Fourier synthesis of the materialized table.
///
/// Instances are immutable and cheap to copy (shared state).
class PeriodicMatrixFunction {
 public:
  using PhasorFormula = std::function<MatrixXcd(int)>;
  using Evaluator = std::function<MatrixXcd(double)>;

  static constexpr int kUnbounded = std::numeric_limits<int>::max();

  PeriodicMatrixFunction() = default;

  /// Constant function C.
  static PeriodicMatrixFunction constant(const MatrixXcd& value, double period);

  /// Trigonometric polynomial with the given phasors; all others are zero.
  static PeriodicMatrixFunction from_phasors(const std::map<int, MatrixXcd>& phasors,
                                             double period);

  /// Trigonometric polynomial from a symmetric table indexed k + order.
  static PeriodicMatrixFunction from_table(std::vector<MatrixXcd> table, double period);

  /// Infinite-bandwidth function with a closed-form phasor formula.
  /// `table_order` phasors are materialized eagerly for fast synthesis.
  static PeriodicMatrixFunction from_formula(Eigen::Index rows, Eigen::Index cols,
                                             double period, PhasorFormula formula,
                                             Evaluator exact, int table_order,
                                             std::vector<double> breakpoints = {});

  /// Phasors known only up to |k| <= order (e.g. from quadrature).
  static PeriodicMatrixFunction from_sampled(std::vector<MatrixXcd> table, double period,
                                             Evaluator exact = {},
                                             std::vector<double> breakpoints = {});

  /// Evaluator only; no phasors available until phasors_of() is applied.
  static PeriodicMatrixFunction from_evaluator(Eigen::Index rows, Eigen::Index cols,
                                               double period, Evaluator exact,
                                               std::vector<double> breakpoints = {});

  Eigen::Index rows() const { return state_->rows; }
  Eigen::Index cols() const { return state_->cols; }
  double period() const { return state_->period; }
  double omega() const { return omega_of(state_->period); }
  bool empty() const { return state_ == nullptr; }

  /// Largest |k| whose phasor can be produced; kUnbounded for exact sources.
  int available_order() const { return state_->available_order; }
  /// Order of the materialized table used by synthesize().
  int table_order() const { return state_->table_order; }
  /// True when phasors beyond the table are exactly zero.
  bool bandlimited() const { return state_->bandlimited; }
  bool has_exact_evaluator() const { return static_cast<bool>(state_->exact); }
  /// Exact evaluator present, or the function is a trigonometric polynomial.
  bool exactly_evaluable() const { return has_exact_evaluator() || bandlimited(); }
  /// Points in [0, T) where the function or its derivative jumps.
  const std::vector<double>& breakpoints() const { return state_->breakpoints; }

  /// k-th phasor; throws MissingPhasors past available_order().
  MatrixXcd phasor(int k) const;

  /// Exact value when an evaluator is attached, else Fourier synthesis.
  MatrixXcd evaluate(double t) const;
  /// evaluate() with the imaginary part checked against `tol` and dropped.
  MatrixXd evaluate_real(double t, double tol = 1e-8) const;
  /// Finite synthesis over |k| <= min(order, table_order()).
  MatrixXcd synthesize(double t, int order = kUnbounded) const;
  /// Time derivative of the synthesis, sum j w k phasor(k) e^{j w k t}.
  MatrixXcd synthesize_derivative(double t, int order = kUnbounded) const;

  /// Copy with the table extended to |k| <= order (no-op if already there).
  PeriodicMatrixFunction materialized(int order) const;
  /// Trigonometric polynomial made of phasors |k| <= order (explicit truncation).
  PeriodicMatrixFunction truncated(int order) const;
  /// Copy with the exact evaluator replaced by synthesis.
  PeriodicMatrixFunction without_evaluator() const;

 private:
  struct State {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    double period = 1.0;
    std::vector<MatrixXcd> table;  // index k + table_order
    int table_order = -1;
    int available_order = -1;
    bool bandlimited = false;
    PhasorFormula formula;
    Evaluator exact;
    std::vector<double> breakpoints;
  };
  explicit PeriodicMatrixFunction(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  std::shared_ptr<const State> state_;

  friend PeriodicMatrixFunction operator+(const PeriodicMatrixFunction&,
                                          const PeriodicMatrixFunction&);
  friend PeriodicMatrixFunction operator*(cplx, const PeriodicMatrixFunction&);
  friend PeriodicMatrixFunction product(const PeriodicMatrixFunction&,
                                        const PeriodicMatrixFunction&, int);
  friend PeriodicMatrixFunction adjoint(const PeriodicMatrixFunction&);
  friend PeriodicMatrixFunction place(const PeriodicMatrixFunction&, Eigen::Index,
                                      Eigen::Index, Eigen::Index, Eigen::Index);
};

PeriodicMatrixFunction operator+(const PeriodicMatrixFunction& f,
                                 const PeriodicMatrixFunction& g);
PeriodicMatrixFunction operator*(cplx s, const PeriodicMatrixFunction& f);
inline PeriodicMatrixFunction operator-(const PeriodicMatrixFunction& f,
                                        const PeriodicMatrixFunction& g) {
  return f + cplx(-1.0) * g;
}

/// Pointwise product f(t) g(t). Phasors are an exact convolution when at least
/// one factor is a trigonometric polynomial; otherwise they are obtained by
/// quadrature up to `sampled_order`.
PeriodicMatrixFunction product(const PeriodicMatrixFunction& f,
                               const PeriodicMatrixFunction& g, int sampled_order = 64);

/// Pointwise conjugate transpose, phasor(k) -> phasor(-k)^*.
PeriodicMatrixFunction adjoint(const PeriodicMatrixFunction& f);

/// Embed a function as the (row, col) block of a rows x cols zero function.
PeriodicMatrixFunction place(const PeriodicMatrixFunction& f, Eigen::Index row,
                             Eigen::Index col, Eigen::Index rows, Eigen::Index cols);

/// Phasors by uniform (periodic trapezoidal) quadrature,
///   phasor(k) = (1/N) sum_i f(t_i) e^{-j w k t_i},  t_i = i T / N.
/// Requires resolution >= 4K + 4. The evaluator is kept as the exact one.
PeriodicMatrixFunction phasors_of(const PeriodicMatrixFunction::Evaluator& f,
                                  Eigen::Index rows, Eigen::Index cols, double period,
                                  int order, int resolution,
                                  std::vector<double> breakpoints = {});
PeriodicMatrixFunction phasors_of(const PeriodicMatrixFunction& f, int order,
                                  int resolution);

// Scalar waveforms of the case-study family. All are 1x1 and carry closed-form
// phasors and an exact evaluator.

/// offset + amplitude * sgn(sin(w t)).
PeriodicMatrixFunction waveform_square(double offset, double amplitude, int order,
                                       double period = 1.0);
/// offset + amplitude * (8/pi^2) sum_{odd n} cos(w n t)/n^2 (peak `amplitude` at t = 0).
PeriodicMatrixFunction waveform_triangle(double offset, double amplitude, int order,
                                         double period = 1.0);
/// offset + amplitude * (2/pi) sum_{k>=1} (-1)^k/k sin(w k t + phase).
/// phase = 0 is a falling sawtooth of peak `amplitude`; any other phase adds a
/// logarithmic term that is singular at t = T/2 (mod T).
PeriodicMatrixFunction waveform_sawtooth(double offset, double amplitude, double phase,
                                         int order, double period = 1.0);

struct TrigTerm {
  int harmonic = 1;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};
/// offset + sum cos_coeff cos(w h t) + sin_coeff sin(w h t).
PeriodicMatrixFunction waveform_trig_polynomial(double offset,
                                                const std::vector<TrigTerm>& terms,
                                                double period = 1.0);

}  // namespace harmonic
