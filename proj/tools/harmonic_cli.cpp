// Command-line front end: one subcommand per pipeline stage plus the full
// case-study runner. Exit codes: 0 success, 2 configuration error, 3 numerical
// failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "harmonic/case_study.hpp"

namespace {

using namespace harmonic;

struct Flags {
  std::string config;
  std::string out = ".";
  std::string m;
  std::optional<double> alpha;
  std::string lambda;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  bool counter_example = false;
};

std::string to_csv(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

std::string path(const Flags& f, const std::string& name) { return f.out + "/" + name; }

void emit_json(const Flags& f, const std::string& name, const json& j) {
  write_file(path(f, name), j.dump(2) + "\n");
}

std::vector<int> orders(const Flags& f, const std::vector<int>& fallback) {
  return f.m.empty() ? fallback : parse_order_list(f.m);
}

ScenarioConfig load(const Flags& f) {
  if (f.config.empty()) throw ConfigError("--config is required");
  return parse_scenario_or_system(read_json_file(f.config));
}

int floquet_steps(const Flags& f, const ScenarioConfig& c) {
  const int steps = f.steps.value_or(c.floquet_steps);
  if (steps < 2) throw ConfigError("--steps must be at least 2");
  return steps;
}

// G and Lambda for the configured design, with --alpha / --lambda overrides.
struct Recipe {
  PeriodicMatrixFunction G;
  MatrixXcd Lambda;
  std::optional<FloquetFactorization> floquet;
};

Recipe recipe(const Flags& f, const ScenarioConfig& c, int g_order) {
  const auto& A = c.system.A;
  Recipe r;
  const bool direct = c.design.kind == DesignChoice::Kind::Direct && !f.alpha;
  if (direct) {
    r.G = *c.design.G;
    r.Lambda = *c.design.Lambda;
  } else {
    FloquetOptions opt;
    opt.steps = floquet_steps(f, c);
    r.floquet = factorize(A, opt);
    const double alpha = f.alpha.value_or(c.design.alpha);
    r.G = sufficient_recipe_G(c.system.B, *r.floquet, g_order).truncated(g_order);
    r.Lambda = -r.floquet->J.adjoint() - alpha * MatrixXcd::Identity(A.rows(), A.rows());
  }
  if (!f.lambda.empty()) r.Lambda = parse_lambda_spec(f.lambda);
  if (r.Lambda.rows() != A.rows()) throw ConfigError("Lambda must be n x n");

  return r;
}

int cmd_phasors(const Flags& f) {
  const json j = read_json_file(f.config);
  const int K = orders(f, {10}).back();
  if (j.contains("rows")) {
    const auto s = signal_from_json(j);
    emit_json(f, "phasors.json", json{{"order", K}, {"phasors", phasors_to_json(s, K)}});
    write_file(path(f, "phasor_magnitudes.csv"),
               to_csv([&](std::ostream& o) { write_phasor_magnitude_csv(o, s, K, "f"); }));
    return 0;
  }
  const auto c = parse_scenario_or_system(j);
  emit_json(f, "phasors.json", json{{"order", K},
                                    {"A", phasors_to_json(c.system.A, K)},
                                    {"B", phasors_to_json(c.system.B, K)}});
  write_file(path(f, "phasor_magnitudes_A.csv"),
             to_csv([&](std::ostream& o) { write_phasor_magnitude_csv(o, c.system.A, K, "a"); }));
  write_file(path(f, "phasor_magnitudes_B.csv"),
             to_csv([&](std::ostream& o) { write_phasor_magnitude_csv(o, c.system.B, K, "b"); }));
  return 0;
}

int cmd_lift(const Flags& f) {
  const auto c = load(f);
  const int m = orders(f, {10}).back();
  const auto& A = c.system.A;
  const auto lift_A = toeplitz_lift(A, m);
  const auto H = harmonic_state_operator(A, m);
  write_file(path(f, "lift_A.csv"), to_csv([&](std::ostream& o) { write_matrix_csv(o, lift_A.dense); }));
  write_file(path(f, "lift_B.csv"), to_csv([&](std::ostream& o) {
               write_matrix_csv(o, toeplitz_lift(c.system.B, m).dense);
             }));
  write_file(path(f, "harmonic_state_operator.csv"),
             to_csv([&](std::ostream& o) { write_matrix_csv(o, H); }));
  json eig = json::array();
  for (const cplx z : central_spectrum(H, A.omega(), m)) eig.push_back(complex_to_json(z));
  emit_json(f, "spectrum.json", json{{"m", m}, {"keep", m}, {"central_eigenvalues", eig}});
  return 0;
}

int cmd_sylvester(const Flags& f) {
  const auto c = load(f);
  const auto ms = orders(f, c.m_list);
  const auto r = recipe(f, c, 2 * ms.back());
  SylvesterOptions opt;
  if (r.floquet) opt.floquet_exponents = r.floquet->exponents;
  const auto sweep = convergence_sweep(c.system.A, c.system.B, r.G, r.Lambda, ms, ms.back(), opt);
  json rows = json::array();
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const auto& row = sweep.rows[i];
    const auto& sol = sweep.solutions[i];
    rows.push_back(json{{"m", row.m}, {"delta", row.delta}, {"algebraic", row.algebraic},
                        {"differential", row.differential}});
    const std::string stem = "sylvester_m" + std::to_string(row.m);
    emit_json(f, stem + ".json", sylvester_to_json(sol));
    write_file(path(f, stem + "_magnitudes.csv"),
               to_csv([&](std::ostream& o) { write_phasor_magnitude_csv(o, sol.P, sol.m, "P"); }));
  }
  emit_json(f, "sweep.json", json{{"reference_m", sweep.reference_m}, {"rows", rows},
                                  {"monotone", sweep.monotone}});
  return 0;
}

int cmd_floquet(const Flags& f) {
  const auto c = load(f);
  FloquetOptions opt;
  opt.steps = floquet_steps(f, c);
  const auto F = factorize(c.system.A, opt);
  emit_json(f, "floquet.json", floquet_to_json(F));
  write_file(path(f, "V.csv"), to_csv([&](std::ostream& o) {
               write_function_csv(o, F.V, 0.0, F.period, 1000, "V");
             }));
  return 0;
}

int cmd_design(const Flags& f) {
  const auto c = load(f);
  const int m = orders(f, c.m_list).back();
  const auto r = recipe(f, c, 2 * m);
  DesignOptions opt;
  if (r.floquet) opt.sylvester.floquet_exponents = r.floquet->exponents;
  const bool real_recipe = r.floquet && r.Lambda.imag().cwiseAbs().maxCoeff() == 0.0;
  const auto outcome =
      real_recipe ? design_real_recipe(c.system.A, c.system.B, r.G, r.Lambda, r.floquet->exponents,
                                       m, 24, opt)
                        .outcome
                  : design_direct(c.system.A, c.system.B, r.G, r.Lambda, m, opt);
  if (!outcome.gain) {
    emit_json(f, "certificate.json", certificate_to_json(outcome.certificate));
    throw NotInvertible("P(t) is not invertible (min |det P| = " +
                            std::to_string(outcome.certificate.min_abs_det) + " at t = " +
                            std::to_string(outcome.certificate.argmin_t) + ")",
                        outcome.certificate.min_abs_det, outcome.certificate.argmin_t);
  }
  json out = gain_to_json(*outcome.gain, c.system.description);
  if (c.raw.contains("simulation")) out["simulation"] = c.raw.at("simulation");
  emit_json(f, "gain.json", out);
  write_file(path(f, "K.csv"), to_csv([&](std::ostream& o) {
               write_function_csv(o, outcome.gain->K, 0.0, 2.0 * c.system.A.period(), 2000, "K");
             }));
  return 0;
}

int cmd_simulate(const Flags& f) {
  if (f.config.empty()) throw ConfigError("--config is required");
  const json j = read_json_file(f.config);
  if (!j.contains("system")) throw ConfigError("simulate: the gain file carries no 'system'");
  const auto gain = gain_from_json(j);
  json scenario{{"system", j.at("system")}};
  if (j.contains("simulation")) scenario["simulation"] = j.at("simulation");
  const auto c = parse_scenario(scenario);
  const auto& A = c.system.A;
  const auto& B = c.system.B;
  const double T = A.period();
  const double step = f.steps ? T / *f.steps : c.simulation.step;
  if (f.steps && *f.steps < 1) throw ConfigError("--steps must be positive");
  const VectorXd x0 = f.seed ? seeded_state(A.rows(), *f.seed)
                             : c.simulation.x0.value_or(seeded_state(A.rows(), c.seed));
  json report{{"x0", json::array()}, {"step", step}, {"t_end", c.simulation.t_end}};
  for (Eigen::Index i = 0; i < x0.size(); ++i) report["x0"].push_back(x0(i));
  SimulationResult run;
  if (c.simulation.segments.empty()) {
    const auto z = verify_z_dynamics(gain, A, B, x0, c.simulation.t_end, step, c.simulation.stride);
    run = z.run;
    report["z_deviation_relative_to_x0"] = z.relative_to_x0;
    report["z_deviation_relative_to_z0"] = z.relative_to_z0;
  } else {
    SimulationOptions opt;
    opt.stride = c.simulation.stride;
    const auto tr = tracking_scenario(gain.K, A, B, build_segments(c, gain.m), x0,
                                      c.simulation.t_end, step, opt);
    run = tr.run;
    json segs = json::array();
    for (const auto& s : tr.segments) {
      segs.push_back(json{{"t_start", s.t_start}, {"t_end", s.t_end}, {"err_start", s.err_start},
                          {"err_end", s.err_end}});
    }
    report["segments"] = segs;
  }
  report["escaped"] = run.escaped;
  report["final_state"] = {run.x.back()(0), run.x.back().size() > 1 ? run.x.back()(1) : 0.0};
  emit_json(f, "simulation.json", report);
  write_file(path(f, "trace.csv"), to_csv([&](std::ostream& o) { write_trace_csv(o, run); }));
  return 0;
}

int cmd_equilibrium(const Flags& f) {
  const auto c = load(f);
  const int m = orders(f, c.m_list).back();
  const auto segs = build_segments(c, m);
  json out = json::array();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    json e = equilibrium_to_json(segs[i].equilibrium);
    e["t_start"] = segs[i].t_start;
    out.push_back(e);
    write_file(path(f, "x_ref_" + std::to_string(i) + ".csv"), to_csv([&](std::ostream& o) {
                 write_function_csv(o, segs[i].equilibrium.x_ref, 0.0, c.system.A.period(), 1000,
                                    "x");
               }));
  }
  emit_json(f, "equilibria.json", out);
  return 0;
}

int cmd_case_study(const Flags& f) {
  CaseStudyOptions opt;
  opt.out_dir = f.out;
  opt.counter_example_only = f.counter_example;
  if (!f.lambda.empty()) opt.lambda = parse_lambda_spec(f.lambda);
  if (f.steps) opt.floquet_steps = *f.steps;
  if (f.seed) opt.seed = *f.seed;
  if (!f.m.empty()) {
    opt.m_list = parse_order_list(f.m);
    opt.m = opt.m_list.back();
    opt.reference_m = std::max(opt.reference_m, opt.m);
  }
  const json summary = run_case_study(opt);
  std::cout << "status: " << summary.at("status").get<std::string>() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic pole placement for linear time-periodic systems"};
  app.require_subcommand(1);
  Flags flags;
  std::string active;

  const auto add = [&](const std::string& name, const std::string& help, bool design_flags) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON configuration file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--m", flags.m, "truncation orders, comma separated");
    sub->add_option("--steps", flags.steps, "RK4 steps per period");
    sub->add_option("--seed", flags.seed, "seed for random initial states");
    if (design_flags) {
      sub->add_option("--alpha", flags.alpha, "decay margin of the sufficient design");
      sub->add_option("--lambda", flags.lambda, "closed-loop poles, e.g. diag(-10,-12)");
    }
    sub->callback([&active, name] { active = name; });
    return sub;
  };
  add("phasors", "Fourier phasors of a signal or system", false);
  add("lift", "Truncated block-Toeplitz lifts and central spectrum", false);
  add("sylvester", "Truncated harmonic Sylvester solve and m-sweep", true);
  add("floquet", "Floquet factorization from the monodromy matrix", false);
  add("design", "Periodic pole-placement gain", true);
  add("simulate", "Closed-loop simulation of a design file", false);
  add("equilibrium", "Harmonic equilibria of the configured segments", false);
  auto* cs = add("run_paper_case_study", "Full case study with all artifacts", true);
  cs->add_flag("--counter-example", flags.counter_example, "only the non-invertible example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (active == "phasors") return cmd_phasors(flags);
    if (active == "lift") return cmd_lift(flags);
    if (active == "sylvester") return cmd_sylvester(flags);
    if (active == "floquet") return cmd_floquet(flags);
    if (active == "design") return cmd_design(flags);
    if (active == "simulate") return cmd_simulate(flags);
    if (active == "equilibrium") return cmd_equilibrium(flags);
    if (active == "run_paper_case_study") return cmd_case_study(flags);
  } catch (const MissingPhasors& e) {
    std::cerr << "config error [" << active << "]: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << active << "]: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error [" << active << "]: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure [" << active << "]: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error [" << active << "]: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error [" << active << "]: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
