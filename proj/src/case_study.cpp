#include "harmonic/case_study.hpp"

#include <cmath>
#include <future>
#include <sstream>

namespace harmonic {

namespace {

json term(const std::string& kind, int row, int col, json fields) {
  fields["kind"] = kind;
  fields["row"] = row;
  fields["col"] = col;
  return fields;
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError("stage '" + name + "': " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError("stage '" + name + "': " + e.what());
  }
}

std::string csv(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

json segments_to_json(const std::vector<SegmentReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) {
    out.push_back(json{{"t_start", r.t_start},
                       {"t_end", r.t_end},
                       {"err_start", r.err_start},
                       {"err_end", r.err_end},
                       {"ratio", r.err_start > 0.0 ? r.err_end / r.err_start : 0.0},
                       {"sup_first_period", r.sup_first_period},
                       {"sup_last_period", r.sup_last_period}});
  }
  return out;
}

// Mean over segments of err(t_start + T) / err(t_start).
double settling_metric(const TrackingResult& tr, double period) {
  double acc = 0.0;
  int count = 0;
  for (std::size_t s = 0; s < tr.segments.size(); ++s) {
    const auto& seg = tr.segments[s];
    if (seg.err_start <= 0.0 || seg.t_start + period > seg.t_end) continue;
    const double target = seg.t_start + period;
    std::size_t best = 0;
    for (std::size_t i = 0; i < tr.run.t.size(); ++i) {
      if (std::abs(tr.run.t[i] - target) < std::abs(tr.run.t[best] - target)) best = i;
    }
    acc += tr.run.e[best].norm() / seg.err_start;
    ++count;
  }
  return count ? acc / count : 0.0;
}

json complex_list(const std::vector<cplx>& zs) {
  json out = json::array();
  for (const cplx z : zs) out.push_back(complex_to_json(z));
  return out;
}

}  // namespace

json example_system_json() {
  const double quarter_pi = pi / 4.0;
  json A_terms = json::array({
      term("const", 0, 0, {{"value", 1.0}}),
      term("square", 0, 0, {{"amplitude", 1.0}}),
      term("const", 0, 1, {{"value", 2.0}}),
      term("triangle", 0, 1, {{"amplitude", 2.0}}),
      term("const", 1, 0, {{"value", -1.0}}),
      term("sawtooth", 1, 0, {{"amplitude", 1.0}, {"phase", quarter_pi}}),
      term("const", 1, 1, {{"value", 1.0}}),
      term("sin", 1, 1, {{"amplitude", -2.0}, {"harmonic", 1}}),
      term("sin", 1, 1, {{"amplitude", -2.0}, {"harmonic", 3}}),
      term("cos", 1, 1, {{"amplitude", 2.0}, {"harmonic", 3}}),
      term("cos", 1, 1, {{"amplitude", 2.0}, {"harmonic", 5}}),
  });
  json B_terms = json::array({
      term("const", 0, 0, {{"value", 1.0}}),
      term("cos", 0, 0, {{"amplitude", 2.0}, {"harmonic", 2}}),
      term("sin", 0, 0, {{"amplitude", 4.0}, {"harmonic", 6}}),
  });
  return json{{"A", {{"rows", 2}, {"cols", 2}, {"T", 1.0}, {"terms", A_terms}}},
              {"B", {{"rows", 2}, {"cols", 1}, {"T", 1.0}, {"terms", B_terms}}}};
}

LtpSystem example_system() { return system_from_json(example_system_json()); }

json example_scenario_json() {
  json u_mid{{"rows", 1},
             {"cols", 1},
             {"T", 1.0},
             {"terms", json::array({term("const", 0, 0, {{"value", 1.0}}),
                                    term("cos", 0, 0, {{"amplitude", 1.0}, {"harmonic", 1}})})}};
  json x_d{{"rows", 2},
           {"cols", 1},
           {"T", 1.0},
           {"terms", json::array({term("cos", 0, 0, {{"amplitude", 0.25}, {"harmonic", 1}})})}};
  return json{{"system", example_system_json()},
              {"design", {{"kind", "sufficient"}, {"alpha", 1.0}}},
              {"m", {4, 6, 8, 10}},
              {"floquet_steps", 20000},
              {"seed", 0},
              {"simulation",
               {{"x0", {1.0, 1.0}},
                {"t_end", 9.0},
                {"step", 1e-4},
                {"stride", 10},
                {"segments", json::array({json{{"t_start", 0.0}},
                                          json{{"t_start", 3.0}, {"u_ref", u_mid}},
                                          json{{"t_start", 6.0}, {"x_d", x_d}}})}}}};
}

CounterExampleReport run_counter_example(const LtpSystem& system, int m, double step) {
  const auto G = signal_from_json(json{{"rows", 1},
                                       {"cols", 2},
                                       {"T", system.A.period()},
                                       {"terms", json::array({term("const", 0, 0, {{"value", 1.0}}),
                                                              term("const", 0, 1, {{"value", 1.0}})})}});
  MatrixXcd Lambda = MatrixXcd::Zero(2, 2);
  Lambda(0, 0) = -5.0;
  Lambda(1, 1) = -7.0;
  CounterExampleReport out;
  const auto outcome = design_direct(system.A, system.B, G, Lambda, m);
  out.solution = outcome.solution;
  out.certificate = outcome.certificate;
  out.observability = observability_heuristic(G, Lambda, m, system.A.period());
  const MatrixXcd P0 = out.solution.P.evaluate(0.0);
  out.escape = riccati_escape_probe(system.A, system.B, G, Lambda, P0.inverse(), step,
                                    system.A.period());
  return out;
}

json run_case_study(const CaseStudyOptions& options) {
  const std::string dir = options.out_dir;
  const auto scenario = stage("config", [] { return parse_scenario(example_scenario_json()); });
  const LtpSystem& sys = scenario.system;
  const auto& A = sys.A;
  const auto& B = sys.B;
  const double T = A.period();
  const double omega = A.omega();
  json summary;
  summary["status"] = "ok";

  if (options.counter_example_only) {
    const auto ce = stage("counter-example",
                          [&] { return run_counter_example(sys, options.m, options.step); });
    summary["status"] = ce.certificate.invertible ? "Invertible" : "NotInvertible";
    summary["counter_example"] = {{"certificate", certificate_to_json(ce.certificate)},
                                  {"observability_passes", ce.observability.passes},
                                  {"observability_min_eigenvalue", ce.observability.min_eigenvalue},
                                  {"escaped", ce.escape.escaped},
                                  {"escape_time", ce.escape.escape_time}};
    write_file(dir + "/counter_example_P.csv",
               csv([&](std::ostream& o) { write_function_csv(o, ce.solution.P, 0.0, T, 1000, "P"); }));
    write_file(dir + "/summary.json", summary.dump(2) + "\n");
    return summary;
  }

  // (a) Floquet factorization.
  FloquetOptions fopt;
  fopt.steps = options.floquet_steps;
  const auto F = stage("floquet", [&] { return factorize(A, fopt); });
  write_file(dir + "/floquet.json", floquet_to_json(F).dump(2) + "\n");
  write_file(dir + "/floquet_V.csv",
             csv([&](std::ostream& o) { write_function_csv(o, F.V, 0.0, T, 1000, "V"); }));
  const std::vector<cplx> reported{cplx(1.0, 1.64), cplx(1.0, -1.64)};
  const auto spectrum = stage("spectrum", [&] {
    return central_spectrum(harmonic_state_operator(A, options.m), omega, 6.0);
  });
  double to_reported = 0.0;
  double to_computed = 0.0;
  for (const cplx z : spectrum) {
    to_reported = std::max(to_reported, lattice_distance(z, reported, omega));
    to_computed = std::max(to_computed, lattice_distance(z, F.exponents, omega));
  }
  summary["floquet_exponents"] = complex_list(F.exponents);
  summary["floquet"] = {{"halving_delta", F.halving_delta},
                        {"monodromy_converged", F.monodromy_converged},
                        {"periodicity_defect", F.periodicity_defect},
                        {"similarity_defect", F.similarity_defect}};
  summary["harmonic_spectrum"] = {{"central_eigenvalues", complex_list(spectrum)},
                                  {"max_distance_to_reported_lattice", to_reported},
                                  {"max_distance_to_computed_lattice", to_computed}};

  // (b) Sylvester sweep with the sufficient-recipe G.
  const int ref = options.reference_m;
  const auto G = stage("recipe", [&] { return sufficient_recipe_G(B, F, 2 * ref).truncated(2 * ref); });
  const MatrixXcd Lambda_suff = -F.J.adjoint() - MatrixXcd::Identity(2, 2);
  SylvesterOptions sopt;
  sopt.floquet_exponents = F.exponents;
  const auto sweep = stage("sylvester", [&] {
    return convergence_sweep(A, B, G, Lambda_suff, options.m_list, ref, sopt);
  });
  json rows = json::array();
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const auto& r = sweep.rows[i];
    rows.push_back(json{{"m", r.m}, {"delta", r.delta}, {"algebraic", r.algebraic},
                        {"differential", r.differential}});
    const auto& sol = sweep.solutions[i];
    write_file(dir + "/P_phasors_m" + std::to_string(r.m) + ".csv",
               csv([&](std::ostream& o) { write_phasor_magnitude_csv(o, sol.P, sol.m, "P"); }));
    write_file(dir + "/P_trace_m" + std::to_string(r.m) + ".csv",
               csv([&](std::ostream& o) { write_function_csv(o, sol.P, 0.0, T, 1000, "P"); }));
  }
  summary["sylvester_sweep"] = {{"reference_m", sweep.reference_m}, {"rows", rows},
                                {"monotone", sweep.monotone}};

  // (c, d) Gains for both pole choices at the working order.
  const int m = options.m;
  const MatrixXcd Lambda_fast = options.lambda.value_or([] {
    MatrixXcd L = MatrixXcd::Zero(2, 2);
    L(0, 0) = -10.0;
    L(1, 1) = -12.0;
    return L;
  }());
  const auto Gm = G.truncated(2 * m);
  const auto gain_suff = stage("design", [&] {
    return require_gain(design_direct(A, B, Gm, Lambda_suff, m));
  });
  const bool real_poles = Lambda_fast.imag().cwiseAbs().maxCoeff() == 0.0;
  json mixing;
  const auto gain_fast = stage("design-direct", [&] {
    if (!real_poles) return require_gain(design_direct(A, B, Gm, Lambda_fast, m));
    const auto r = design_real_recipe(A, B, Gm, Lambda_fast, F.exponents, m);
    mixing = {{"angle", r.angle}, {"reflected", r.reflected}, {"det_ratio", r.det_ratio},
              {"matrix", matrix_to_json(r.mixing)}};
    return require_gain(r.outcome);
  });
  write_file(dir + "/gain_sufficient.json", gain_to_json(gain_suff, sys.description).dump(2) + "\n");
  write_file(dir + "/gain_direct.json", gain_to_json(gain_fast, sys.description).dump(2) + "\n");
  write_file(dir + "/K_m" + std::to_string(m) + ".csv",
             csv([&](std::ostream& o) { write_function_csv(o, gain_suff.K, 0.0, 2.0 * T, 2000, "K"); }));
  const auto poles = stage("pole-check", [&] { return closed_loop_pole_check(gain_fast, A, B, m); });
  const auto mono = stage("closed-loop-monodromy",
                          [&] { return closed_loop_monodromy(gain_fast.K, A, B, options.floquet_steps); });
  Eigen::EigenSolver<MatrixXd> mono_es(mono.matrix, false);
  json moduli = json::array();
  for (Eigen::Index i = 0; i < mono_es.eigenvalues().size(); ++i) {
    moduli.push_back(std::abs(mono_es.eigenvalues()(i)));
  }
  summary["design"] = {
      {"sufficient", {{"Lambda", matrix_to_json(Lambda_suff)},
                      {"certificate", certificate_to_json(gain_suff.certificate)},
                      {"max_imag_residue", gain_suff.max_imag_residue}}},
      {"direct", {{"Lambda", matrix_to_json(Lambda_fast)},
                  {"certificate", certificate_to_json(gain_fast.certificate)},
                  {"max_imag_residue", gain_fast.max_imag_residue},
                  {"real_mixing", mixing},
                  {"pole_check_max_deviation", poles.max_deviation},
                  {"central_eigenvalues", complex_list(poles.central_eigenvalues)},
                  {"closed_loop_multiplier_moduli", moduli}}}};

  // (e) Tracking runs, run concurrently.
  const auto segments = stage("equilibrium", [&] { return build_segments(scenario, m); });
  const VectorXd x0 = *scenario.simulation.x0;
  const double t_end = scenario.simulation.t_end;
  SimulationOptions simopt;
  simopt.stride = scenario.simulation.stride;
  auto run_suff = std::async(std::launch::async, [&] {
    return tracking_scenario(gain_suff.K, A, B, segments, x0, t_end, options.step, simopt);
  });
  auto run_trunc = std::async(std::launch::async, [&] {
    return tracking_scenario(gain_suff.truncated_K(), A, B, segments, x0, t_end, options.step,
                             simopt);
  });
  const auto track_fast = stage("tracking", [&] {
    return tracking_scenario(gain_fast.K, A, B, segments, x0, t_end, options.step, simopt);
  });
  const auto track_suff = stage("tracking", [&] { return run_suff.get(); });
  const auto track_trunc = stage("tracking", [&] { return run_trunc.get(); });
  write_file(dir + "/tracking_sufficient.csv",
             csv([&](std::ostream& o) { write_trace_csv(o, track_suff.run); }));
  write_file(dir + "/tracking_fast.csv",
             csv([&](std::ostream& o) { write_trace_csv(o, track_fast.run); }));
  double path_gap = 0.0;
  for (std::size_t i = 0; i < std::min(track_suff.run.x.size(), track_trunc.run.x.size()); ++i) {
    path_gap = std::max(path_gap, (track_suff.run.x[i] - track_trunc.run.x[i]).norm());
  }
  const double settle_suff = settling_metric(track_suff, T);
  const double settle_fast = settling_metric(track_fast, T);
  summary["tracking"] = {
      {"x0", {x0(0), x0(1)}},
      {"sufficient", segments_to_json(track_suff.segments)},
      {"direct", segments_to_json(track_fast.segments)},
      {"settling_sufficient", settle_suff},
      {"settling_direct", settle_fast},
      {"transient_improvement", settle_fast > 0.0 ? settle_suff / settle_fast : 0.0},
      {"truncated_K_max_state_gap", path_gap}};
  json eqs = json::array();
  for (const auto& s : segments) eqs.push_back(equilibrium_to_json(s.equilibrium));
  write_file(dir + "/equilibria.json", eqs.dump(2) + "\n");

  // (f) Counter-example.
  const auto ce = stage("counter-example", [&] { return run_counter_example(sys, m, options.step); });
  write_file(dir + "/counter_example_P.csv",
             csv([&](std::ostream& o) { write_function_csv(o, ce.solution.P, 0.0, T, 1000, "P"); }));
  summary["counter_example"] = {{"status", ce.certificate.invertible ? "Invertible" : "NotInvertible"},
                                {"certificate", certificate_to_json(ce.certificate)},
                                {"observability_passes", ce.observability.passes},
                                {"observability_min_eigenvalue", ce.observability.min_eigenvalue},
                                {"escaped", ce.escape.escaped},
                                {"escape_time", ce.escape.escape_time}};

  write_file(dir + "/summary.json", summary.dump(2) + "\n");
  return summary;
}

}  // namespace harmonic
