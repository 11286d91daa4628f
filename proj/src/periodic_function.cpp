#include "harmonic/periodic_function.hpp"

#include <algorithm>
#include <cmath>

namespace harmonic {

namespace {

// Fractional position of t within its period, in [0, 1).
double phase_fraction(double t, double period) {
  const double s = t / period;
  return s - std::floor(s);
}

// Points closer than this (in units of T) to a jump take the midpoint value.
constexpr double kJumpSnap = 1e-13;

bool near(double s, double target) {
  return std::abs(s - target) < kJumpSnap || std::abs(s - target - 1.0) < kJumpSnap ||
         std::abs(s - target + 1.0) < kJumpSnap;
}

std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b) {
  std::vector<double> out = a;
  for (double x : b) {
    if (std::none_of(out.begin(), out.end(),
                     [x](double y) { return std::abs(x - y) < 1e-14; })) {
      out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void require_same_period(double a, double b) {
  if (std::abs(a - b) > 1e-12 * std::max(a, b)) {
    throw ConfigError("periodic functions with different periods cannot be combined");
  }
}

// Accumulates sum_{|k|<=order} table[k+order] z^k with z = e^{j w t}.
MatrixXcd synthesize_table(const std::vector<MatrixXcd>& table, int table_order, int order,
                           double omega, double t, bool derivative, Eigen::Index rows,
                           Eigen::Index cols) {
  MatrixXcd out = MatrixXcd::Zero(rows, cols);
  const int kmax = std::min(order, table_order);
  if (kmax < 0) return out;
  if (!derivative) out += table[table_order];
  const cplx z = std::polar(1.0, omega * t);
  cplx zk = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    zk *= z;
    const cplx scale = derivative ? cplx(0.0, omega * k) : cplx(1.0);
    out += (scale * zk) * table[table_order + k];
    out += (std::conj(scale) * std::conj(zk)) * table[table_order - k];
  }
  return out;
}

}  // namespace

PeriodicMatrixFunction PeriodicMatrixFunction::constant(const MatrixXcd& value,
                                                        double period) {
  return from_table({value}, period);
}

PeriodicMatrixFunction PeriodicMatrixFunction::from_phasors(
    const std::map<int, MatrixXcd>& phasors, double period) {
  if (phasors.empty()) throw ConfigError("from_phasors: no phasors given");
  int order = 0;
  for (const auto& [k, _] : phasors) order = std::max(order, std::abs(k));
  const auto& first = phasors.begin()->second;
  std::vector<MatrixXcd> table(2 * order + 1, MatrixXcd::Zero(first.rows(), first.cols()));
  for (const auto& [k, v] : phasors) {
    if (v.rows() != first.rows() || v.cols() != first.cols()) {
      throw ConfigError("from_phasors: inconsistent phasor shapes");
    }
    table[order + k] = v;
  }
  return from_table(std::move(table), period);
}

PeriodicMatrixFunction PeriodicMatrixFunction::from_table(std::vector<MatrixXcd> table,
                                                          double period) {
  if (table.empty() || table.size() % 2 == 0) {
    throw ConfigError("phasor table must have odd length 2K+1");
  }
  if (!(period > 0.0)) throw ConfigError("period must be positive");
  auto s = std::make_shared<State>();
  s->rows = table.front().rows();
  s->cols = table.front().cols();
  s->period = period;
  s->table_order = static_cast<int>(table.size() / 2);
  s->table = std::move(table);
  s->available_order = kUnbounded;
  s->bandlimited = true;
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction PeriodicMatrixFunction::from_formula(
    Eigen::Index rows, Eigen::Index cols, double period, PhasorFormula formula,
    Evaluator exact, int table_order, std::vector<double> breakpoints) {
  if (!(period > 0.0)) throw ConfigError("period must be positive");
  auto s = std::make_shared<State>();
  s->rows = rows;
  s->cols = cols;
  s->period = period;
  s->table_order = std::max(table_order, 0);
  s->table.reserve(2 * s->table_order + 1);
  for (int k = -s->table_order; k <= s->table_order; ++k) s->table.push_back(formula(k));
  s->available_order = kUnbounded;
  s->formula = std::move(formula);
  s->exact = std::move(exact);
  s->breakpoints = std::move(breakpoints);
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction PeriodicMatrixFunction::from_sampled(std::vector<MatrixXcd> table,
                                                            double period, Evaluator exact,
                                                            std::vector<double> breakpoints) {
  if (table.empty() || table.size() % 2 == 0) {
    throw ConfigError("phasor table must have odd length 2K+1");
  }
  auto s = std::make_shared<State>();
  s->rows = table.front().rows();
  s->cols = table.front().cols();
  s->period = period;
  s->table_order = static_cast<int>(table.size() / 2);
  s->available_order = s->table_order;
  s->table = std::move(table);
  s->exact = std::move(exact);
  s->breakpoints = std::move(breakpoints);
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction PeriodicMatrixFunction::from_evaluator(
    Eigen::Index rows, Eigen::Index cols, double period, Evaluator exact,
    std::vector<double> breakpoints) {
  if (!exact) throw ConfigError("from_evaluator: evaluator is empty");
  auto s = std::make_shared<State>();
  s->rows = rows;
  s->cols = cols;
  s->period = period;
  s->exact = std::move(exact);
  s->breakpoints = std::move(breakpoints);
  return PeriodicMatrixFunction(std::move(s));
}

MatrixXcd PeriodicMatrixFunction::phasor(int k) const {
  const int ak = std::abs(k);
  const auto& s = *state_;
  if (ak <= s.table_order) return s.table[s.table_order + k];
  if (ak > s.available_order) throw MissingPhasors(ak, s.available_order);
  if (s.bandlimited) return MatrixXcd::Zero(s.rows, s.cols);
  return s.formula(k);
}

MatrixXcd PeriodicMatrixFunction::evaluate(double t) const {
  if (state_->exact) return state_->exact(t);
  return synthesize(t);
}

MatrixXd PeriodicMatrixFunction::evaluate_real(double t, double tol) const {
  const MatrixXcd v = evaluate(t);
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if (max_imag(v) > tol * scale) {
    throw NumericalError("expected a real value at t=" + std::to_string(t) +
                         " but imaginary residue is " + std::to_string(max_imag(v)));
  }
  return v.real();
}

MatrixXcd PeriodicMatrixFunction::synthesize(double t, int order) const {
  const auto& s = *state_;
  return synthesize_table(s.table, s.table_order, order, omega(), t, false, s.rows, s.cols);
}

MatrixXcd PeriodicMatrixFunction::synthesize_derivative(double t, int order) const {
  const auto& s = *state_;
  return synthesize_table(s.table, s.table_order, order, omega(), t, true, s.rows, s.cols);
}

PeriodicMatrixFunction PeriodicMatrixFunction::materialized(int order) const {
  if (order > available_order()) throw MissingPhasors(order, available_order());
  if (bandlimited() || order <= table_order()) return *this;
  auto s = std::make_shared<State>(*state_);
  s->table.clear();
  s->table.reserve(2 * order + 1);
  for (int k = -order; k <= order; ++k) s->table.push_back(phasor(k));
  s->table_order = order;
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction PeriodicMatrixFunction::truncated(int order) const {
  if (order > available_order()) throw MissingPhasors(order, available_order());
  std::vector<MatrixXcd> table;
  table.reserve(2 * order + 1);
  for (int k = -order; k <= order; ++k) table.push_back(phasor(k));
  return from_table(std::move(table), period());
}

PeriodicMatrixFunction PeriodicMatrixFunction::without_evaluator() const {
  auto s = std::make_shared<State>(*state_);
  s->exact = nullptr;
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction operator+(const PeriodicMatrixFunction& f,
                                 const PeriodicMatrixFunction& g) {
  if (f.rows() != g.rows() || f.cols() != g.cols()) {
    throw ConfigError("sum of periodic functions with different shapes");
  }
  require_same_period(f.period(), g.period());
  auto s = std::make_shared<PeriodicMatrixFunction::State>();
  s->rows = f.rows();
  s->cols = f.cols();
  s->period = f.period();
  s->available_order = std::min(f.available_order(), g.available_order());
  s->bandlimited = f.bandlimited() && g.bandlimited();
  int order = std::max(f.table_order(), g.table_order());
  order = std::min(order, s->available_order);
  s->table_order = order;
  for (int k = -order; k <= order; ++k) s->table.push_back(f.phasor(k) + g.phasor(k));
  if (!s->bandlimited && s->available_order > order) {
    s->formula = [f, g](int k) -> MatrixXcd { return f.phasor(k) + g.phasor(k); };
  }
  if (f.exactly_evaluable() && g.exactly_evaluable() &&
      (f.has_exact_evaluator() || g.has_exact_evaluator())) {
    s->exact = [f, g](double t) -> MatrixXcd { return f.evaluate(t) + g.evaluate(t); };
  }
  s->breakpoints = merge_breakpoints(f.breakpoints(), g.breakpoints());
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction operator*(cplx c, const PeriodicMatrixFunction& f) {
  auto s = std::make_shared<PeriodicMatrixFunction::State>(*f.state_);
  for (auto& m : s->table) m *= c;
  if (s->formula) {
    s->formula = [c, f](int k) -> MatrixXcd { return c * f.phasor(k); };
  }
  if (s->exact) {
    s->exact = [c, f](double t) -> MatrixXcd { return c * f.evaluate(t); };
  }
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction product(const PeriodicMatrixFunction& f,
                               const PeriodicMatrixFunction& g, int sampled_order) {
  if (f.cols() != g.rows()) throw ConfigError("product: inner dimensions differ");
  require_same_period(f.period(), g.period());
  const double period = f.period();
  PeriodicMatrixFunction::Evaluator exact;
  if (f.exactly_evaluable() && g.exactly_evaluable()) {
    exact = [f, g](double t) -> MatrixXcd { return f.evaluate(t) * g.evaluate(t); };
  }
  auto breakpoints = merge_breakpoints(f.breakpoints(), g.breakpoints());

  const auto convolve = [](const PeriodicMatrixFunction& poly,
                           const PeriodicMatrixFunction& other, bool poly_left) {
    const int L = poly.table_order();
    return [poly, other, L, poly_left](int k) -> MatrixXcd {
      MatrixXcd acc = MatrixXcd::Zero(poly_left ? poly.rows() : other.rows(),
                                      poly_left ? other.cols() : poly.cols());
      for (int l = -L; l <= L; ++l) {
        acc += poly_left ? MatrixXcd(poly.phasor(l) * other.phasor(k - l))
                         : MatrixXcd(other.phasor(k - l) * poly.phasor(l));
      }
      return acc;
    };
  };

  if (f.bandlimited() && g.bandlimited()) {
    const int order = f.table_order() + g.table_order();
    auto formula = convolve(f, g, true);
    std::vector<MatrixXcd> table;
    for (int k = -order; k <= order; ++k) table.push_back(formula(k));
    return PeriodicMatrixFunction::from_table(std::move(table), period);
  }
  if (f.bandlimited() || g.bandlimited()) {
    const auto& poly = f.bandlimited() ? f : g;
    const auto& other = f.bandlimited() ? g : f;
    const int L = poly.table_order();
    const int avail = other.available_order() == PeriodicMatrixFunction::kUnbounded
                          ? PeriodicMatrixFunction::kUnbounded
                          : other.available_order() - L;
    if (avail >= 0) {
      auto formula = convolve(poly, other, f.bandlimited());
      const int table_order = std::min(avail, std::max(other.table_order(), 0));
      if (avail == PeriodicMatrixFunction::kUnbounded) {
        return PeriodicMatrixFunction::from_formula(f.rows(), g.cols(), period, formula, exact,
                                                    table_order, breakpoints);
      }
      std::vector<MatrixXcd> table;
      for (int k = -avail; k <= avail; ++k) table.push_back(formula(k));
      return PeriodicMatrixFunction::from_sampled(std::move(table), period, exact,
                                                  breakpoints);
    }
  }
  if (!exact) {
    throw ConfigError("product: phasors of the factors do not determine the product");
  }
  return phasors_of(exact, f.rows(), g.cols(), period, sampled_order,
                    std::max(8 * sampled_order + 8, 1024), breakpoints);
}

PeriodicMatrixFunction adjoint(const PeriodicMatrixFunction& f) {
  auto s = std::make_shared<PeriodicMatrixFunction::State>(*f.state_);
  std::swap(s->rows, s->cols);
  const int K = s->table_order;
  for (int k = -K; k <= K; ++k) s->table[K + k] = f.phasor(-k).adjoint();
  if (s->formula) {
    s->formula = [f](int k) -> MatrixXcd { return f.phasor(-k).adjoint(); };
  }
  if (s->exact) {
    s->exact = [f](double t) -> MatrixXcd { return f.evaluate(t).adjoint(); };
  }
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction place(const PeriodicMatrixFunction& f, Eigen::Index row,
                             Eigen::Index col, Eigen::Index rows, Eigen::Index cols) {
  if (row < 0 || col < 0 || row + f.rows() > rows || col + f.cols() > cols) {
    throw ConfigError("place: block does not fit");
  }
  auto s = std::make_shared<PeriodicMatrixFunction::State>(*f.state_);
  s->rows = rows;
  s->cols = cols;
  const auto embed = [=](const MatrixXcd& m) {
    MatrixXcd out = MatrixXcd::Zero(rows, cols);
    out.block(row, col, m.rows(), m.cols()) = m;
    return out;
  };
  for (auto& m : s->table) m = embed(m);
  if (s->formula) {
    s->formula = [f, embed](int k) -> MatrixXcd { return embed(f.phasor(k)); };
  }
  if (s->exact) {
    s->exact = [f, embed](double t) -> MatrixXcd { return embed(f.evaluate(t)); };
  }
  return PeriodicMatrixFunction(std::move(s));
}

PeriodicMatrixFunction phasors_of(const PeriodicMatrixFunction::Evaluator& f,
                                  Eigen::Index rows, Eigen::Index cols, double period,
                                  int order, int resolution, std::vector<double> breakpoints) {
  if (order < 0) throw ConfigError("phasors_of: negative order");
  if (resolution < 4 * order + 4) {
    throw AliasingError("phasors_of: resolution " + std::to_string(resolution) +
                        " is below 4K+4 = " + std::to_string(4 * order + 4));
  }
  const double omega = omega_of(period);
  std::vector<MatrixXcd> table(2 * order + 1, MatrixXcd::Zero(rows, cols));
  for (int i = 0; i < resolution; ++i) {
    const double t = period * i / resolution;
    const MatrixXcd v = f(t);
    if (v.rows() != rows || v.cols() != cols) {
      throw ConfigError("phasors_of: evaluator returned the wrong shape");
    }
    const cplx z = std::polar(1.0, -omega * t);
    cplx zk = 1.0;
    table[order] += v;
    for (int k = 1; k <= order; ++k) {
      zk *= z;
      table[order + k] += zk * v;
      table[order - k] += std::conj(zk) * v;
    }
  }
  for (auto& m : table) m /= static_cast<double>(resolution);
  return PeriodicMatrixFunction::from_sampled(std::move(table), period, f,
                                              std::move(breakpoints));
}

PeriodicMatrixFunction phasors_of(const PeriodicMatrixFunction& f, int order,
                                  int resolution) {
  const auto eval = [f](double t) { return f.evaluate(t); };
  return phasors_of(eval, f.rows(), f.cols(), f.period(), order, resolution,
                    f.breakpoints());
}

namespace {

MatrixXcd scalar(cplx v) {
  MatrixXcd m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

PeriodicMatrixFunction waveform_square(double offset, double amplitude, int order,
                                       double period) {
  auto formula = [offset, amplitude](int k) {
    if (k == 0) return scalar(offset);
    if (k % 2 == 0) return scalar(0.0);
    return scalar(amplitude * cplx(0.0, -2.0) / (pi * k));
  };
  auto exact = [offset, amplitude, period](double t) {
    const double s = phase_fraction(t, period);
    if (near(s, 0.0) || near(s, 0.5)) return scalar(offset);
    return scalar(offset + (s < 0.5 ? amplitude : -amplitude));
  };
  return PeriodicMatrixFunction::from_formula(1, 1, period, formula, exact, order,
                                              {0.0, 0.5 * period});
}

PeriodicMatrixFunction waveform_triangle(double offset, double amplitude, int order,
                                         double period) {
  auto formula = [offset, amplitude](int k) {
    if (k == 0) return scalar(offset);
    if (k % 2 == 0) return scalar(0.0);
    return scalar(amplitude * 4.0 / (pi * pi * double(k) * double(k)));
  };
  auto exact = [offset, amplitude, period](double t) {
    double s = phase_fraction(t, period);
    if (s > 0.5) s -= 1.0;
    return scalar(offset + amplitude * (1.0 - 4.0 * std::abs(s)));
  };
  return PeriodicMatrixFunction::from_formula(1, 1, period, formula, exact, order,
                                              {0.0, 0.5 * period});
}

PeriodicMatrixFunction waveform_sawtooth(double offset, double amplitude, double phase,
                                         int order, double period) {
  const cplx rotation = std::polar(1.0, phase);
  auto formula = [offset, amplitude, rotation](int k) {
    if (k == 0) return scalar(offset);
    const int a = std::abs(k);
    const double sign = (a % 2 == 0) ? 1.0 : -1.0;
    const cplx c = amplitude * (2.0 / pi) * sign / double(a) * rotation / cplx(0.0, 2.0);
    return scalar(k > 0 ? c : std::conj(c));
  };
  // sum_{k>=1} (-1)^k sin(k x + phase)/k = -(cos(phase) x/2 + sin(phase) ln|2 cos(x/2)|)
  // on (-pi, pi). The log term is singular at x = pi; that point is read at a
  // distance of 1e-12 T.
  auto exact = [offset, amplitude, phase, period](double t) {
    double s = phase_fraction(t, period);
    if (s > 0.5) s -= 1.0;
    const double x = 2.0 * pi * s;
    const bool at_jump = near(std::abs(s), 0.5);
    const double ramp = at_jump ? 0.0 : std::cos(phase) * x / 2.0;
    const double c = std::max(std::abs(2.0 * std::cos(x / 2.0)), 2.0 * pi * 1e-12);
    const double log_term = std::sin(phase) == 0.0 ? 0.0 : std::sin(phase) * std::log(c);
    return scalar(offset - amplitude * (2.0 / pi) * (ramp + log_term));
  };
  return PeriodicMatrixFunction::from_formula(1, 1, period, formula, exact, order,
                                              {0.5 * period});
}

PeriodicMatrixFunction waveform_trig_polynomial(double offset,
                                                const std::vector<TrigTerm>& terms,
                                                double period) {
  std::map<int, MatrixXcd> phasors;
  phasors[0] = scalar(offset);
  for (const auto& term : terms) {
    if (term.harmonic < 0) throw ConfigError("trig polynomial: negative harmonic");
    if (term.harmonic == 0) {
      phasors[0](0, 0) += term.cos_coeff;
      continue;
    }
    const int h = term.harmonic;
    if (!phasors.count(h)) phasors[h] = scalar(0.0);
    if (!phasors.count(-h)) phasors[-h] = scalar(0.0);
    const cplx plus = 0.5 * cplx(term.cos_coeff, -term.sin_coeff);
    phasors[h](0, 0) += plus;
    phasors[-h](0, 0) += std::conj(plus);
  }
  return PeriodicMatrixFunction::from_phasors(phasors, period);
}

}  // namespace harmonic
