#include "harmonic/simulation.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "harmonic/integrator.hpp"

namespace harmonic {

namespace {

long checked_steps(const PeriodicMatrixFunction& A, const PeriodicMatrixFunction& B,
                   double t0, double t1, double step) {
  if (!(step > 0.0)) throw ConfigError("simulate: step must be positive");
  if (!(t1 >= t0)) throw ConfigError("simulate: t1 must not precede t0");
  if (whole_steps(A.period(), step) < 0) {
    throw ConfigError("simulate: step must divide the period");
  }
  if (!breakpoints_aligned(A.breakpoints(), step) ||
      !breakpoints_aligned(B.breakpoints(), step) || (t0 != 0.0 && whole_steps(t0, step) < 0)) {
    throw ConfigError("simulate: grid must land on the coefficient breakpoints");
  }
  const long n = whole_steps(t1 - t0, step);
  if (n < 0) throw ConfigError("simulate: step must divide the time span");
  return n;
}

MatrixXd real_part(const MatrixXcd& m) { return m.real(); }

}  // namespace

SimulationResult simulate(const PeriodicMatrixFunction& A, const PeriodicMatrixFunction& B,
                          const ControlLaw& law, const VectorXd& x0, double t0, double t1,
                          double step, const SimulationOptions& options) {
  const long n = checked_steps(A, B, t0, t1, step);
  if (x0.size() != A.rows()) throw ConfigError("simulate: x0 has the wrong size");
  if (options.stride < 1) throw ConfigError("simulate: stride must be positive");
  const auto rhs = [&](double t, const VectorXd& x) -> VectorXd {
    return A.evaluate_real(t) * x + B.evaluate_real(t) * law(t, x);
  };

  SimulationResult out;
  const auto record = [&](double t, const VectorXd& x) {
    out.t.push_back(t);
    out.x.push_back(x);
    out.u.push_back(law(t, x));
  };
  VectorXd x = x0;
  record(t0, x);
  for (long i = 0; i < n; ++i) {
    const double t = t0 + step * static_cast<double>(i);
    x = rk4_step(rhs, t, x, step);
    const double t_next = t0 + step * static_cast<double>(i + 1);
    if (!x.allFinite() || x.norm() > options.escape_guard) {
      out.escaped = true;
      out.escape_time = t_next;
      out.events.push_back({t_next, "escape", "state norm exceeded the guard"});
      break;
    }
    if ((i + 1) % options.stride == 0 || i + 1 == n) record(t_next, x);
  }

  if (options.step_doubling && !out.escaped) {
    SimulationOptions coarse = options;
    coarse.step_doubling = false;
    coarse.stride = std::numeric_limits<int>::max();
    try {
      const auto run = simulate(A, B, law, x0, t0, t1, 2.0 * step, coarse);
      if (!run.escaped) out.step_doubling_delta = (run.x.back() - out.x.back()).norm();
    } catch (const ConfigError&) {
      out.events.push_back({t1, "note", "step doubling skipped: coarse grid misaligned"});
    }
  }
  return out;
}

ControlLaw state_feedback(const PeriodicMatrixFunction& K) {
  return [K](double t, const VectorXd& x) -> VectorXd {
    return -(real_part(K.evaluate(t)) * x);
  };
}

ControlLaw open_loop(Eigen::Index inputs) {
  return [inputs](double, const VectorXd&) -> VectorXd { return VectorXd::Zero(inputs); };
}

ZDynamicsReport verify_z_dynamics(const GainSchedule& gain, const PeriodicMatrixFunction& A,
                                  const PeriodicMatrixFunction& B, const VectorXd& x0,
                                  double t_end, double step, int stride) {
  ZDynamicsReport out;
  SimulationOptions opts;
  opts.stride = stride;
  out.run = simulate(A, B, state_feedback(gain.K), x0, 0.0, t_end, step, opts);
  if (x0.norm() == 0.0) return out;
  const VectorXcd z0 = gain.P.evaluate(0.0).partialPivLu().solve(x0.cast<cplx>());
  double worst = 0.0;
  for (std::size_t i = 0; i < out.run.t.size(); ++i) {
    const double t = out.run.t[i];
    const VectorXcd z = gain.P.evaluate(t).partialPivLu().solve(out.run.x[i].cast<cplx>());
    const VectorXcd expected = MatrixXcd(gain.Lambda * t).exp() * z0;
    out.run.z.push_back(z);
    worst = std::max(worst, (z - expected).norm());
  }
  out.relative_to_x0 = worst / x0.norm();
  out.relative_to_z0 = worst / z0.norm();
  return out;
}

TrackingResult tracking_scenario(const PeriodicMatrixFunction& K,
                                 const PeriodicMatrixFunction& A,
                                 const PeriodicMatrixFunction& B,
                                 const std::vector<TrackingSegment>& segments,
                                 const VectorXd& x0, double t_end, double step,
                                 const SimulationOptions& options) {
  if (segments.empty()) throw ConfigError("tracking: at least one segment required");
  for (std::size_t s = 1; s < segments.size(); ++s) {
    if (!(segments[s].t_start > segments[s - 1].t_start)) {
      throw ConfigError("tracking: segment start times must ascend");
    }
  }
  const double t0 = segments.front().t_start;
  const auto active = [&segments](double t) {
    std::size_t s = 0;
    while (s + 1 < segments.size() && segments[s + 1].t_start <= t) ++s;
    return s;
  };
  const auto x_ref = [&segments](std::size_t s, double t) -> VectorXd {
    return real_part(segments[s].equilibrium.x_ref.evaluate(t));
  };
  const ControlLaw law = [&](double t, const VectorXd& x) -> VectorXd {
    const std::size_t s = active(t);
    const VectorXd u_ref = real_part(segments[s].equilibrium.u_ref.evaluate(t));
    return -(real_part(K.evaluate(t)) * (x - x_ref(s, t))) + u_ref;
  };

  TrackingResult out;
  out.run = simulate(A, B, law, x0, t0, t_end, step, options);
  for (std::size_t i = 0; i < out.run.t.size(); ++i) {
    const double t = out.run.t[i];
    out.run.e.push_back(out.run.x[i] - x_ref(active(t), t));
  }
  for (std::size_t s = 1; s < segments.size(); ++s) {
    out.run.events.push_back({segments[s].t_start, "switch",
                              "reference segment " + std::to_string(s)});
  }

  const double T = A.period();
  const double tol = 1e-9 * std::max(1.0, t_end);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    SegmentReport rep;
    rep.t_start = segments[s].t_start;
    rep.t_end = s + 1 < segments.size() ? segments[s + 1].t_start : t_end;
    bool first = true;
    for (std::size_t i = 0; i < out.run.t.size(); ++i) {
      const double t = out.run.t[i];
      if (t < rep.t_start - tol || t > rep.t_end + tol) continue;
      const double err = (out.run.x[i] - x_ref(s, t)).norm();
      if (first) {
        rep.err_start = err;
        first = false;
      }
      rep.err_end = err;
      if (t <= rep.t_start + T + tol) rep.sup_first_period = std::max(rep.sup_first_period, err);
      if (t >= rep.t_end - T - tol) rep.sup_last_period = std::max(rep.sup_last_period, err);
    }
    out.segments.push_back(rep);
  }
  return out;
}

double decay_rate(const SimulationResult& result, double t0, int n_periods, double period) {
  if (n_periods < 1) throw ConfigError("decay_rate: need at least one period");
  std::vector<double> ks;
  std::vector<double> logs;
  for (int k = 0; k <= n_periods; ++k) {
    const double target = t0 + k * period;
    const auto it = std::min_element(result.t.begin(), result.t.end(), [&](double a, double b) {
      return std::abs(a - target) < std::abs(b - target);
    });
    if (it == result.t.end() || std::abs(*it - target) > 1e-9 * std::max(1.0, target)) {
      throw ConfigError("decay_rate: trajectory has no sample at t0 + k T");
    }
    const double norm = result.x[it - result.t.begin()].norm();
    if (k == 0 && norm == 0.0) throw ConfigError("decay_rate: x(t0) = 0, rate undefined");
    if (norm <= 1e-12) break;
    ks.push_back(k);
    logs.push_back(std::log(norm));
  }
  if (ks.size() < 2) throw NumericalError("decay_rate: fewer than two samples above the floor");
  Eigen::MatrixXd design(ks.size(), 2);
  Eigen::VectorXd rhs(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = ks[i];
    rhs(i) = logs[i];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  return std::exp(coef(1));
}

EscapeReport riccati_escape_probe(const PeriodicMatrixFunction& A,
                                  const PeriodicMatrixFunction& B,
                                  const PeriodicMatrixFunction& G, const MatrixXcd& Lambda,
                                  const MatrixXcd& P0_inverse, double step, double t_end,
                                  double guard) {
  if (!(step > 0.0)) throw ConfigError("riccati_escape_probe: step must be positive");
  const long n = whole_steps(t_end, step);
  if (n < 0) throw ConfigError("riccati_escape_probe: step must divide the horizon");
  const auto rhs = [&](double t, const MatrixXcd& Y) -> MatrixXcd {
    return -Y * A.evaluate(t) + Lambda * Y + Y * B.evaluate(t) * G.evaluate(t) * Y;
  };
  EscapeReport out;
  MatrixXcd Y = P0_inverse;
  for (long i = 0; i < n; ++i) {
    Y = rk4_step(rhs, step * static_cast<double>(i), Y, step);
    const double norm = Y.norm();
    if (!std::isfinite(norm) || norm > guard) {
      out.escaped = true;
      out.escape_time = step * static_cast<double>(i + 1);
      out.final_norm = norm;
      return out;
    }
  }
  out.final_norm = Y.norm();
  return out;
}

MonodromyResult closed_loop_monodromy(const PeriodicMatrixFunction& K,
                                      const PeriodicMatrixFunction& A,
                                      const PeriodicMatrixFunction& B, int steps) {
  std::vector<double> bps = A.breakpoints();
  bps.insert(bps.end(), B.breakpoints().begin(), B.breakpoints().end());
  const auto closed = PeriodicMatrixFunction::from_evaluator(
      A.rows(), A.cols(), A.period(),
      [A, B, K](double t) -> MatrixXcd {
        return (real_part(A.evaluate(t)) - real_part(B.evaluate(t)) * real_part(K.evaluate(t)))
            .cast<cplx>();
      },
      bps);
  return monodromy(closed, steps);
}

}  // namespace harmonic
