#include <doctest.h>

#include "harmonic/case_study.hpp"

using namespace harmonic;

namespace {

PeriodicMatrixFunction constant(const MatrixXcd& M) { return PeriodicMatrixFunction::constant(M, 1.0); }
PeriodicMatrixFunction scalar(double v) { return constant(MatrixXcd::Constant(1, 1, v)); }

}  // namespace

TEST_SUITE("ltp-sim") {
  TEST_CASE("open loop scalar follows the exponential") {
    const auto r = simulate(scalar(-0.8), scalar(1.0), open_loop(1), VectorXd::Ones(1), 0.0, 2.0, 0.01);
    CHECK(std::abs(r.t.back() - 2.0) < 1e-12);
    CHECK(std::abs(r.x.back()(0) - std::exp(-1.6)) < 1e-9);
    CHECK_FALSE(r.escaped);
  }

  TEST_CASE("open loop of the example system diverges") {
    const auto sys = example_system();
    SimulationOptions opt;
    opt.stride = 100;
    const auto r = simulate(sys.A, sys.B, open_loop(1), VectorXd::Ones(2), 0.0, 3.0, 1e-3, opt);
    CHECK(r.x.back().norm() > 10.0 * r.x.front().norm());
  }

  TEST_CASE("step that does not divide the period is refused") {
    CHECK_THROWS_AS(simulate(scalar(-1.0), scalar(1.0), open_loop(1), VectorXd::Ones(1), 0.0, 1.0, 0.3),
                    ConfigError);
  }

  TEST_CASE("escape guard stops the run") {
    SimulationOptions opt;
    opt.escape_guard = 1e6;
    const auto r = simulate(scalar(30.0), scalar(1.0), open_loop(1), VectorXd::Ones(1), 0.0, 1.0, 1e-3, opt);
    CHECK(r.escaped);
    CHECK(std::abs(r.escape_time - std::log(1e6) / 30.0) < 5e-3);
    REQUIRE_FALSE(r.events.empty());
  }

  TEST_CASE("step doubling reports the endpoint change") {
    SimulationOptions opt;
    opt.step_doubling = true;
    const auto r = simulate(scalar(-1.0), scalar(1.0), open_loop(1), VectorXd::Ones(1), 0.0, 1.0, 0.05, opt);
    CHECK(r.step_doubling_delta > 0.0);
    CHECK(r.step_doubling_delta < 1e-5);
  }

  TEST_CASE("decay rate of a scalar exponential") {
    SimulationOptions opt;
    opt.stride = 10;
    const auto r = simulate(scalar(-2.0), scalar(1.0), open_loop(1), VectorXd::Ones(1), 0.0, 5.0, 1e-3, opt);
    CHECK(std::abs(decay_rate(r, 0.0, 5, 1.0) - std::exp(-2.0)) < 1e-9);
  }

  TEST_CASE("Riccati probe escape time matches the logistic closed form") {
    // Y' = (lam - a) Y + b g Y^2 with c = lam - a = 1, b g = 1, Y0 = 0.5:
    // blow-up at ln(1 + c / Y0) / c.
    MatrixXcd L = MatrixXcd::Constant(1, 1, 0.0);
    const auto r = riccati_escape_probe(scalar(-1.0), scalar(1.0), scalar(1.0), L,
                                        MatrixXcd::Constant(1, 1, 0.5), 1e-4, 2.0);
    CHECK(r.escaped);
    CHECK(std::abs(r.escape_time - std::log(3.0)) < 1e-3);
  }

  TEST_CASE("z-dynamics of a constant design") {
    MatrixXcd A(2, 2), B(2, 1), G(1, 2), L = MatrixXcd::Zero(2, 2);
    A << 0.0, 1.0, -2.0, -3.0;
    B << 0.0, 1.0;
    G << 1.0, 1.0;
    L(0, 0) = -4.0;
    L(1, 1) = -5.0;
    const auto out = design_direct(constant(A), constant(B), constant(G), L, 1);
    REQUIRE(out.gain);
    const auto z = verify_z_dynamics(*out.gain, constant(A), constant(B), VectorXd::Ones(2), 2.0, 1e-3);
    CHECK(z.relative_to_x0 < 1e-9);
  }

  TEST_CASE("tracking a constant reference on a constant system") {
    MatrixXcd A(1, 1), B(1, 1);
    A << 1.0;
    B << 1.0;
    const int m = 1;
    const auto K = scalar(3.0);
    std::vector<TrackingSegment> segs(2);
    segs[0].t_start = 0.0;
    segs[0].equilibrium = harmonic_equilibrium(constant(A), constant(B), VectorXcd::Zero(3), m);
    segs[1].t_start = 2.0;
    VectorXcd U = VectorXcd::Zero(3);
    U(1) = 2.0;
    segs[1].equilibrium = harmonic_equilibrium(constant(A), constant(B), U, m);
    const auto tr = tracking_scenario(K, constant(A), constant(B), segs, VectorXd::Ones(1), 4.0, 1e-3);
    REQUIRE(tr.segments.size() == 2);
    // Closed loop 1 - 3 = -2; the reference after t = 2 is -A^{-1} B u = -2.
    CHECK(std::abs(tr.run.x.back()(0) + 2.0) < 2.1 * std::exp(-4.0));
    CHECK(tr.segments[1].err_end / tr.segments[1].err_start < std::exp(-3.9));
  }
}

TEST_SUITE("property ltp-sim") {
  TEST_CASE("RK4 order check on a periodic scalar system") {
    const auto a = waveform_trig_polynomial(0.2, {{1, 2.0, 0.0}, {2, 0.0, 1.0}});
    const auto run = [&](double h) {
      return simulate(a, scalar(1.0), open_loop(1), VectorXd::Ones(1), 0.0, 1.0, h).x.back()(0);
    };
    const double exact = std::exp(0.2);
    const double e1 = std::abs(run(0.1) - exact);
    const double e2 = std::abs(run(0.05) - exact);
    const double e3 = std::abs(run(0.025) - exact);
    CHECK(std::log2(e1 / e2) > 3.6);
    CHECK(std::log2(e2 / e3) > 3.6);
  }

  TEST_CASE("state feedback equals the open loop of A - B K") {
    const auto A = place(waveform_square(0.0, 1.0, 32), 0, 0, 2, 2) +
                   constant((MatrixXcd(2, 2) << -1.0, 1.0, 0.0, -0.5).finished());
    const auto B = constant((MatrixXcd(2, 1) << 1.0, 0.5).finished());
    const auto K = place(waveform_trig_polynomial(0.5, {{1, 0.3, 0.0}}), 0, 1, 1, 2);
    const auto closed = PeriodicMatrixFunction::from_evaluator(
        2, 2, 1.0,
        [A, B, K](double t) -> MatrixXcd { return A.evaluate(t) - B.evaluate(t) * K.evaluate(t); },
        A.breakpoints());
    const VectorXd x0 = (VectorXd(2) << 1.0, -1.0).finished();
    const auto r1 = simulate(A, B, state_feedback(K), x0, 0.0, 2.0, 1e-3);
    const auto r2 = simulate(closed, constant(MatrixXcd::Zero(2, 1)), open_loop(1), x0, 0.0, 2.0, 1e-3);
    CHECK((r1.x.back() - r2.x.back()).norm() < 1e-12);
  }

  TEST_CASE("seeded initial states are deterministic and bounded") {
    const VectorXd a = seeded_state(3, 42);
    const VectorXd b = seeded_state(3, 42);
    CHECK(a == b);
    CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(a != seeded_state(3, 43));
  }
}
