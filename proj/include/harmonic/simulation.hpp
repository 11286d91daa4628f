#pragma once

#include <functional>
#include <string>
#include <vector>

#include "harmonic/design.hpp"

namespace harmonic {

/// u = law(t, x).
using ControlLaw = std::function<VectorXd(double, const VectorXd&)>;

struct SimulationEvent {
  double time = 0.0;
  std::string kind;
  std::string detail;
};

struct SimulationResult {
  std::vector<double> t;
  std::vector<VectorXd> x;
  std::vector<VectorXd> u;
  /// P(t)^{-1} x(t) when requested.
  std::vector<VectorXcd> z;
  /// Tracking error x - x_ref when a reference is active.
  std::vector<VectorXd> e;
  std::vector<SimulationEvent> events;
  bool escaped = false;
  double escape_time = 0.0;
  /// ||x_end(h) - x_end(2h)||; negative when not computed.
  double step_doubling_delta = -1.0;
};

struct SimulationOptions {
  double escape_guard = 1e12;
  /// Record every `stride`-th step (the final step is always recorded).
  int stride = 1;
  /// Re-run at twice the step and report the endpoint change.
  bool step_doubling = false;
};

/// Fixed-step RK4 for x' = A(t) x + B(t) law(t, x) on [t0, t1]. The step must
/// divide the period and land on every breakpoint of A and B.
SimulationResult simulate(const PeriodicMatrixFunction& A, const PeriodicMatrixFunction& B,
                          const ControlLaw& law, const VectorXd& x0, double t0, double t1,
                          double step, const SimulationOptions& options = {});

/// u = -K(t) x with K read from its exact evaluator.
ControlLaw state_feedback(const PeriodicMatrixFunction& K);
/// u = 0 with `inputs` components.
ControlLaw open_loop(Eigen::Index inputs);

struct ZDynamicsReport {
  /// sup_t ||z(t) - e^{Lambda t} z(0)|| / ||x0||.
  double relative_to_x0 = 0.0;
  /// The same supremum divided by ||z(0)||.
  double relative_to_z0 = 0.0;
  SimulationResult run;
};

/// Closed loop x' = (A - B K) x with z = P^{-1} x compared against e^{Lambda t} z(0).
ZDynamicsReport verify_z_dynamics(const GainSchedule& gain, const PeriodicMatrixFunction& A,
                                  const PeriodicMatrixFunction& B, const VectorXd& x0,
                                  double t_end, double step, int stride = 10);

struct TrackingSegment {
  double t_start = 0.0;
  HarmonicEquilibrium equilibrium;
};

struct SegmentReport {
  double t_start = 0.0;
  double t_end = 0.0;
  double err_start = 0.0;
  double err_end = 0.0;
  double sup_first_period = 0.0;
  double sup_last_period = 0.0;
};

struct TrackingResult {
  SimulationResult run;
  std::vector<SegmentReport> segments;
};

/// u = -K(t)(x - x_ref(t)) + u_ref(t) with the reference of the latest segment
/// whose start time has passed.
TrackingResult tracking_scenario(const PeriodicMatrixFunction& K,
                                 const PeriodicMatrixFunction& A,
                                 const PeriodicMatrixFunction& B,
                                 const std::vector<TrackingSegment>& segments,
                                 const VectorXd& x0, double t_end, double step,
                                 const SimulationOptions& options = {});

/// gamma fitted to ||x(t0 + k T)||, k = 0..n_periods, by log-linear regression.
double decay_rate(const SimulationResult& result, double t0, int n_periods, double period);

struct EscapeReport {
  bool escaped = false;
  double escape_time = 0.0;
  double final_norm = 0.0;
};

/// Y' = -Y A + Lambda Y + Y B G Y, Y(0) = P(0)^{-1}, on [0, t_end] until ||Y||
/// exceeds `guard`.
EscapeReport riccati_escape_probe(const PeriodicMatrixFunction& A,
                                  const PeriodicMatrixFunction& B,
                                  const PeriodicMatrixFunction& G, const MatrixXcd& Lambda,
                                  const MatrixXcd& P0_inverse, double step,
                                  double t_end = 1.0, double guard = 1e12);

/// Monodromy of A - B K.
MonodromyResult closed_loop_monodromy(const PeriodicMatrixFunction& K,
                                      const PeriodicMatrixFunction& A,
                                      const PeriodicMatrixFunction& B, int steps = 20000);

}  // namespace harmonic
