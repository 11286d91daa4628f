#include <doctest.h>

#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "harmonic/integrator.hpp"
#include "harmonic/sylvester.hpp"

using namespace harmonic;

namespace {

// A P - P L = R, vectorized and solved densely.
MatrixXcd dense_sylvester(const MatrixXcd& A, const MatrixXcd& L, const MatrixXcd& R) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = L.rows();
  const MatrixXcd M = Eigen::kroneckerProduct(MatrixXcd::Identity(p, p), A).eval() -
                      Eigen::kroneckerProduct(L.transpose(), MatrixXcd::Identity(n, n)).eval();
  const VectorXcd r = Eigen::Map<const VectorXcd>(R.data(), R.size());
  const VectorXcd x = M.fullPivLu().solve(r);
  return Eigen::Map<const MatrixXcd>(x.data(), n, p);
}

PeriodicMatrixFunction scalar(double v) {
  return PeriodicMatrixFunction::constant(MatrixXcd::Constant(1, 1, v), 1.0);
}

}  // namespace

TEST_SUITE("harmonic-sylvester") {
  TEST_CASE("constant data reduce to the classical Sylvester equation") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    MatrixXcd A(3, 3), B(3, 2), G(2, 3), L(3, 3);
    for (auto* M : {&A, &B, &G}) {
      for (Eigen::Index i = 0; i < M->size(); ++i) (*M)(i) = nd(rng);
    }
    L << cplx(-3.0, 1.0), cplx(0.5, 2.0), 0.0,
         0.0, cplx(-4.0, -1.0), cplx(1.0, 0.0),
         0.0, 0.0, -5.0;
    const MatrixXcd P0 = dense_sylvester(A, L, B * G);
    for (int m : {0, 1, 3}) {
      const auto sol = solve_truncated(PeriodicMatrixFunction::constant(A, 1.0),
                                       PeriodicMatrixFunction::constant(B, 1.0),
                                       PeriodicMatrixFunction::constant(G, 1.0), L, m);
      CHECK((sol.phasor(0) - P0).norm() / P0.norm() < 1e-12);
      for (int k = 1; k <= m; ++k) CHECK(sol.phasor(k).norm() < 1e-12);
      CHECK(sol.residuals.phasor_equation < 1e-12);
    }
  }

  TEST_CASE("scalar closed form with periodic input") {
    const double a0 = -1.5;
    const cplx lam(-2.0, 0.7);
    const auto b = waveform_trig_polynomial(1.0, {{1, 2.0, 0.0}, {2, 0.0, -1.0}});
    MatrixXcd L(1, 1);
    L(0, 0) = lam;
    const auto sol = solve_truncated(scalar(a0), b, scalar(1.0), L, 4);
    const double w = 2.0 * pi;
    for (int k = -4; k <= 4; ++k) {
      const cplx expected = b.phasor(k)(0, 0) / (a0 - cplx(0.0, w * k) - lam);
      CHECK(std::abs(sol.phasor(k)(0, 0) - expected) < 1e-13);
    }
  }

  TEST_CASE("time-varying scalar matches the periodic solution by shooting") {
    // p' = (a(t) - lam) p - b(t), a = 0.5 + cos(w t), b = 1 + sin(w t).
    const double lam = -1.0;
    const auto a = waveform_trig_polynomial(0.5, {{1, 1.0, 0.0}});
    const auto b = waveform_trig_polynomial(1.0, {{1, 0.0, 1.0}});
    MatrixXcd L = MatrixXcd::Constant(1, 1, lam);
    const auto sol = solve_truncated(a, b, scalar(1.0), L, 24);

    const auto rhs = [&](double t, const VectorXd& p) {
      VectorXd d(1);
      d(0) = (a.evaluate(t)(0, 0).real() - lam) * p(0) - b.evaluate(t)(0, 0).real();
      return d;
    };
    const int N = 4000;
    const double h = 1.0 / N;
    auto integrate = [&](double p0, std::vector<double>* trace) {
      VectorXd p = VectorXd::Constant(1, p0);
      for (int i = 0; i < N; ++i) {
        if (trace) trace->push_back(p(0));
        p = rk4_step(rhs, i * h, p, h);
      }
      return p(0);
    };
    const double phi = std::exp((0.5 - lam) * 1.0);
    const double p0 = integrate(0.0, nullptr) / (1.0 - phi);
    std::vector<double> trace;
    integrate(p0, &trace);
    for (int i : {0, 700, 2000, 3333}) {
      CHECK(std::abs(sol.P.evaluate(i * h)(0, 0) - trace[i]) < 1e-8);
    }
  }

  TEST_CASE("overlap with the harmonic spectrum is reported") {
    MatrixXcd L = MatrixXcd::Constant(1, 1, cplx(-1.0, 2.0 * pi));
    SylvesterOptions opt;
    opt.floquet_exponents = std::vector<cplx>{cplx(-1.0, 0.0)};
    CHECK_THROWS_AS(solve_truncated(scalar(-1.0), scalar(1.0), scalar(1.0), L, 3, opt),
                    SpectralOverlap);
    CHECK_THROWS_AS(solve_truncated(scalar(-1.0), scalar(1.0), scalar(1.0), L, 3), SpectralOverlap);
  }

  TEST_CASE("Jordan blocks are rejected") {
    MatrixXcd L(2, 2);
    L << -1.0, 1.0, 0.0, -1.0;
    const auto A = PeriodicMatrixFunction::constant(MatrixXcd::Identity(2, 2), 1.0);
    const auto G = PeriodicMatrixFunction::constant(MatrixXcd::Ones(1, 2), 1.0);
    const auto B = PeriodicMatrixFunction::constant(MatrixXcd::Ones(2, 1), 1.0);
    CHECK_THROWS_AS(solve_truncated(A, B, G, L, 2), ConfigError);
  }

  TEST_CASE("differential residual decreases with m") {
    const auto a = waveform_square(-1.0, 0.5, 128);
    const auto b = waveform_trig_polynomial(1.0, {{1, 1.0, 0.0}});
    MatrixXcd L = MatrixXcd::Constant(1, 1, -3.0);
    double last = 1e300;
    for (int m : {4, 8, 16, 32}) {
      const auto sol = solve_truncated(a, b, scalar(1.0), L, m);
      const double r = differential_residual(sol, a, b, scalar(1.0), 512);
      CHECK(r < last);
      last = r;
    }
  }

  TEST_CASE("convergence sweep on a smooth problem") {
    const auto a = waveform_trig_polynomial(-1.0, {{1, 2.0, 0.0}});
    const auto b = waveform_trig_polynomial(1.0, {{2, 0.0, 1.0}});
    MatrixXcd L = MatrixXcd::Constant(1, 1, -2.0);
    const auto sweep = convergence_sweep(a, b, scalar(1.0), L, {2, 4, 6}, 12);
    CHECK(sweep.rows.size() == 3);
    CHECK(sweep.monotone);
    CHECK(sweep.rows.back().delta < 1e-3);
  }

  TEST_CASE("phasor distance zero-extends") {
    std::vector<MatrixXcd> a{MatrixXcd::Ones(1, 1)};
    std::vector<MatrixXcd> b{MatrixXcd::Constant(1, 1, 2.0), MatrixXcd::Ones(1, 1),
                             MatrixXcd::Constant(1, 1, 2.0)};
    CHECK(std::abs(phasor_distance(a, b) - std::sqrt(8.0)) < 1e-15);
  }
}
