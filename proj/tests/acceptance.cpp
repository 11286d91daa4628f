// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "harmonic/case_study.hpp"

using namespace harmonic;

namespace {

constexpr double kExponentTol = 0.02;
constexpr double kExponentSeconds = 10.0;
constexpr double kSpectrumTol = 0.05;
constexpr double kOracleTol = 1e-10;
constexpr double kTailRatio = 1e-2;
constexpr double kPoleTol = 0.1;
constexpr double kMultiplierLogTol = 0.05;
constexpr double kZTol = 1e-2;
constexpr double kTrackingRatio = 1e-3;
constexpr double kDecayTol = 0.10;
constexpr double kSuiteSeconds = 300.0;

const cplx kReported{1.0, 1.64};

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << name << "  "
            << detail << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
void guarded(int id, const std::string& name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

// Classical dense solve of A P - P L = R by vectorization.
MatrixXcd dense_sylvester(const MatrixXcd& A, const MatrixXcd& L, const MatrixXcd& R) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = L.rows();
  const MatrixXcd M = Eigen::kroneckerProduct(MatrixXcd::Identity(p, p), A).eval() -
                      Eigen::kroneckerProduct(L.transpose(), MatrixXcd::Identity(n, n)).eval();
  const VectorXcd r = Eigen::Map<const VectorXcd>(R.data(), R.size());
  const VectorXcd x = M.fullPivLu().solve(r);
  return Eigen::Map<const MatrixXcd>(x.data(), n, p);
}

struct Shared {
  LtpSystem sys;
  FloquetFactorization F;
  double floquet_seconds = 0.0;
  PeriodicMatrixFunction G;
  MatrixXcd Lambda_suff;
  std::optional<GainSchedule> gain_suff;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string unit_tests = argc > 1 ? argv[1] : "";
  Shared s;
  s.sys = example_system();
  const auto& A = s.sys.A;
  const auto& B = s.sys.B;
  const double T = A.period();
  const double w = A.omega();
  const int m = 10;

  guarded(1, "floquet exponents", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    FloquetOptions opt;
    opt.steps = 20000;
    s.F = factorize(A, opt);
    s.floquet_seconds = seconds_since(t0);
    double err = 0.0;
    for (const cplx z : s.F.exponents) {
      err = std::max(err, std::min(std::abs(z - kReported), std::abs(z - std::conj(kReported))));
    }
    std::ostringstream d;
    d << "exponents " << s.F.exponents[0] << " " << s.F.exponents[1] << " max|err| " << fmt(err)
      << " (tol " << kExponentTol << "), " << fmt(s.floquet_seconds) << " s";
    report(1, "floquet exponents", err <= kExponentTol && s.floquet_seconds < kExponentSeconds,
           d.str());
  });

  guarded(2, "harmonic spectrum", [&] {
    const auto central = central_spectrum(harmonic_state_operator(A, m), w, 6.0);
    const std::vector<cplx> lattice{kReported, std::conj(kReported)};
    double worst = 0.0;
    for (const cplx z : central) worst = std::max(worst, lattice_distance(z, lattice, w));
    report(2, "harmonic spectrum", !central.empty() && worst <= kSpectrumTol,
           std::to_string(central.size()) + " central eigenvalues, max distance " + fmt(worst) +
               " (tol " + fmt(kSpectrumTol) + ")");
  });

  guarded(3, "sylvester oracle", [&] {
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> dim(1, 3);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const int n = dim(rng);
      const int p = dim(rng);
      MatrixXcd Ac(n, n), Bc(n, p), Gc(p, n), L = MatrixXcd::Zero(n, n);
      for (auto* M : {&Ac, &Bc, &Gc}) {
        for (Eigen::Index i = 0; i < M->size(); ++i) (*M)(i) = cplx(nd(rng), 0.0);
      }
      for (int i = 0; i < n; ++i) L(i, i) = cplx(-2.0 - std::abs(nd(rng)), nd(rng));
      for (int i = 0; i + 1 < n; ++i) L(i, i + 1) = cplx(nd(rng), nd(rng));
      const auto Af = PeriodicMatrixFunction::constant(Ac, 1.0);
      const auto Bf = PeriodicMatrixFunction::constant(Bc, 1.0);
      const auto Gf = PeriodicMatrixFunction::constant(Gc, 1.0);
      // P' = A P - P L - B G with constant data: A P0 - P0 L = B G.
      const MatrixXcd P0 = dense_sylvester(Ac, L, Bc * Gc);
      for (int mm : {0, 2, 5}) {
        const auto sol = solve_truncated(Af, Bf, Gf, L, mm);
        double err = (sol.phasor(0) - P0).norm();
        for (int k = -mm; k <= mm; ++k) {
          if (k != 0) err += sol.phasor(k).norm();
        }
        worst = std::max(worst, err / P0.norm());
      }
    }
    report(3, "sylvester oracle", worst <= kOracleTol,
           "20 instances x m in {0,2,5}, max relative error " + fmt(worst) + " (tol " +
               fmt(kOracleTol) + ")");
  });

  guarded(4, "truncation convergence", [&] {
    s.G = sufficient_recipe_G(B, s.F, 24).truncated(24);
    s.Lambda_suff = -s.F.J.adjoint() - MatrixXcd::Identity(2, 2);
    SylvesterOptions opt;
    opt.floquet_exponents = s.F.exponents;
    const auto sweep = convergence_sweep(A, B, s.G, s.Lambda_suff, {4, 6, 8, 10}, 12, opt);
    std::ostringstream d;
    d << "delta";
    bool decreasing = true;
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
      d << " m=" << sweep.rows[i].m << ":" << fmt(sweep.rows[i].delta);
      if (i > 0 && !(sweep.rows[i].delta < sweep.rows[i - 1].delta)) decreasing = false;
    }
    const auto& sol = sweep.solutions.back();
    double peak = 0.0;
    double tail = 0.0;
    for (int k = -sol.m; k <= sol.m; ++k) {
      const double mag = sol.phasor(k).cwiseAbs().maxCoeff();
      peak = std::max(peak, mag);
      if (std::abs(k) > 8) tail = std::max(tail, mag);
    }
    d << "; m=10 tail/peak " << fmt(tail / peak) << " (tol " << kTailRatio << ")";
    report(4, "truncation convergence", decreasing && tail <= kTailRatio * peak, d.str());
  });

  guarded(5, "pole placement", [&] {
    MatrixXcd L = MatrixXcd::Zero(2, 2);
    L(0, 0) = -10.0;
    L(1, 1) = -12.0;
    const auto r = design_real_recipe(A, B, s.G.truncated(2 * m), L, s.F.exponents, m);
    const auto gain = require_gain(r.outcome);
    const auto poles = closed_loop_pole_check(gain, A, B, m);
    const auto mono = closed_loop_monodromy(gain.K, A, B, 20000);
    Eigen::EigenSolver<MatrixXd> es(mono.matrix, false);
    std::vector<double> logs;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      logs.push_back(std::log(std::abs(es.eigenvalues()(i))) / T);
    }
    std::sort(logs.begin(), logs.end(), std::greater<>());
    const double e1 = std::abs(logs[0] + 10.0) / 10.0;
    const double e2 = std::abs(logs[1] + 12.0) / 12.0;
    std::ostringstream d;
    d << "central max deviation " << fmt(poles.max_deviation) << " (tol " << kPoleTol
      << "); log|mu| " << fmt(logs[0]) << ", " << fmt(logs[1]) << " rel err " << fmt(e1) << ", "
      << fmt(e2) << " (tol " << kMultiplierLogTol << ")";
    report(5, "pole placement",
           poles.max_deviation <= kPoleTol && e1 <= kMultiplierLogTol && e2 <= kMultiplierLogTol,
           d.str());
  });

  guarded(6, "z-dynamics", [&] {
    DesignOptions opt;
    s.gain_suff = design_sufficient(A, B, 1.0, m, s.F, opt);
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const VectorXd x0 = seeded_state(2, seed);
      const auto z = verify_z_dynamics(*s.gain_suff, A, B, x0, 3.0 * T, 1e-4);
      worst = std::max(worst, z.relative_to_x0);
    }
    report(6, "z-dynamics", worst <= kZTol,
           "5 seeded x0, sup relative deviation " + fmt(worst) + " (tol " + fmt(kZTol) + ")");
  });

  guarded(7, "tracking scenario", [&] {
    const auto scenario = parse_scenario(example_scenario_json());
    const auto segments = build_segments(scenario, m);
    SimulationOptions opt;
    opt.stride = 10;
    const auto tr = tracking_scenario(s.gain_suff->K, A, B, segments, *scenario.simulation.x0,
                                      scenario.simulation.t_end, 1e-4, opt);
    bool pass = true;
    std::ostringstream d;
    d << "end/start";
    for (const auto& seg : tr.segments) {
      const double ratio = seg.err_end / seg.err_start;
      d << " [" << seg.t_start << "," << seg.t_end << "):" << fmt(ratio);
      if (!(ratio <= kTrackingRatio)) pass = false;
    }
    d << " (tol " << kTrackingRatio << "); final-segment distance to X_d "
      << fmt(segments.back().equilibrium.distance);
    report(7, "tracking scenario", pass, d.str());
  });

  guarded(8, "counter-example", [&] {
    const auto ce = run_counter_example(s.sys, m, 1e-4);
    const bool cert_fails = !ce.certificate.invertible && ce.certificate.det_sign_changes >= 1;
    std::ostringstream d;
    d << "certificate " << (ce.certificate.invertible ? "pass" : "fail") << " (min|det| "
      << fmt(ce.certificate.min_abs_det) << ", " << ce.certificate.det_sign_changes
      << " sign changes); observability " << (ce.observability.passes ? "pass" : "fail")
      << "; escape " << (ce.escape.escaped ? "at t=" + fmt(ce.escape.escape_time) : "none");
    report(8, "counter-example",
           cert_fails && ce.observability.passes && ce.escape.escaped && ce.escape.escape_time < 1.0,
           d.str());
  });

  guarded(9, "decay rate", [&] {
    SimulationOptions opt;
    opt.stride = 100;
    const auto run = simulate(A, B, state_feedback(s.gain_suff->K), VectorXd::Ones(2), 0.0,
                              6.0 * T, 1e-4, opt);
    const double gamma = decay_rate(run, T, 5, T);
    const double target = std::exp(-2.0 * T);
    const double rel = std::abs(gamma - target) / target;
    report(9, "decay rate", rel <= kDecayTol,
           "gamma " + fmt(gamma) + " vs e^-2 " + fmt(target) + ", rel err " + fmt(rel) +
               " (tol " + fmt(kDecayTol) + ")");
  });

  guarded(10, "property suites", [&] {
    if (unit_tests.empty()) {
      report(10, "property suites", false, "unit test binary path not given");
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::string props = unit_tests + " -ts='property*' -nv > /dev/null 2>&1";
    const int prop_status = std::system(props.c_str());
    const std::string all = unit_tests + " > /dev/null 2>&1";
    const int all_status = std::system(all.c_str());
    const double secs = seconds_since(t0);
    report(10, "property suites", prop_status == 0 && all_status == 0 && secs <= kSuiteSeconds,
           std::string("properties ") + (prop_status == 0 ? "green" : "red") + ", full unit suite " +
               (all_status == 0 ? "green" : "red") + ", " + fmt(secs) + " s (limit " +
               fmt(kSuiteSeconds) + " s)");
  });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
