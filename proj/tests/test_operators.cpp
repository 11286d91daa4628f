#include <doctest.h>

#include <random>

#include "harmonic/floquet.hpp"
#include "harmonic/operators.hpp"

using namespace harmonic;

namespace {

PeriodicMatrixFunction random_trig_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                                          int band) {
  std::normal_distribution<double> nd;
  std::map<int, MatrixXcd> ph;
  for (int k = 0; k <= band; ++k) {
    MatrixXcd P(r, c);
    for (Eigen::Index i = 0; i < P.size(); ++i) P(i) = cplx(nd(rng), k == 0 ? 0.0 : nd(rng));
    ph[k] = P;
    if (k > 0) ph[-k] = P.conjugate();
  }
  return PeriodicMatrixFunction::from_phasors(ph, 1.0);
}

}  // namespace

TEST_SUITE("harmonic-operators") {
  TEST_CASE("Toeplitz entries follow the phasor difference") {
    const auto f = waveform_trig_polynomial(0.5, {{1, 1.0, 2.0}, {2, -1.0, 0.0}});
    const auto L = toeplitz_lift(f, 3);
    REQUIRE(L.dense.rows() == 7);
    for (int r = -3; r <= 3; ++r) {
      for (int c = -3; c <= 3; ++c) {
        CHECK(L.dense(r + 3, c + 3) == f.phasor(r - c)(0, 0));
      }
    }
  }

  TEST_CASE("block layout is state outer, harmonic inner") {
    MatrixXcd C(2, 2);
    C << 1.0, 2.0, 3.0, 4.0;
    const auto L = toeplitz_lift(PeriodicMatrixFunction::constant(C, 1.0), 1);
    CHECK(L.dense.rows() == 6);
    CHECK(MatrixXcd(L.block(0, 1)) == 2.0 * MatrixXcd::Identity(3, 3));
    CHECK(MatrixXcd(L.block(1, 0)) == 3.0 * MatrixXcd::Identity(3, 3));
  }

  TEST_CASE("lift at m = 0 is the mean") {
    MatrixXcd C(2, 2);
    C << 1.0, -2.0, 0.0, 3.0;
    const auto L = toeplitz_lift(PeriodicMatrixFunction::constant(C, 1.0), 0);
    CHECK(L.dense == C);
  }

  TEST_CASE("missing phasors are refused instead of zero-filled") {
    const auto f = phasors_of([](double t) { return MatrixXcd::Constant(1, 1, std::cos(2 * pi * t)); },
                              1, 1, 1.0, 5, 64);
    CHECK_NOTHROW(toeplitz_lift(f, 2));
    CHECK_THROWS_AS(toeplitz_lift(f, 3), MissingPhasors);
  }

  TEST_CASE("frequency shift for n = 1, m = 1") {
    const auto N = frequency_shift(1, 1, 2.0 * pi);
    CHECK(std::abs(N.diagonal(0) - cplx(0.0, -2.0 * pi)) < 1e-15);
    CHECK(N.diagonal(1) == cplx(0.0));
    CHECK(std::abs(N.diagonal(2) - cplx(0.0, 2.0 * pi)) < 1e-15);
  }

  TEST_CASE("constant scalar a gives diag(a - j w k)") {
    const double a = -0.7;
    const auto H = harmonic_state_operator(PeriodicMatrixFunction::constant(MatrixXcd::Constant(1, 1, a), 1.0), 4);
    for (int k = -4; k <= 4; ++k) {
      CHECK(std::abs(H(k + 4, k + 4) - cplx(a, -2.0 * pi * k)) < 1e-14);
    }
    CHECK((H - MatrixXcd(H.diagonal().asDiagonal())).norm() == 0.0);
    const auto spec = central_spectrum(H, 2.0 * pi, 4.0);
    REQUIRE(spec.size() == 5);
    for (int k = -2; k <= 2; ++k) CHECK(std::abs(spec[k + 2] - cplx(a, 2.0 * pi * k)) < 1e-12);
  }

  TEST_CASE("circ product with a scalar reproduces the lift") {
    const auto f = waveform_trig_polynomial(1.0, {{1, 0.5, 0.0}});
    const auto L = toeplitz_lift(f, 2);
    CHECK((circ_product(MatrixXcd::Constant(1, 1, 2.0), L) - 2.0 * L.dense).norm() == 0.0);
  }

  TEST_CASE("constant lift") {
    MatrixXcd Lm(2, 2);
    Lm << 1.0, 2.0, 0.0, -1.0;
    const auto C = constant_lift(Lm, 1);
    CHECK(C.rows() == 6);
    CHECK(C(0, 3) == cplx(2.0));
    CHECK(C(0, 4) == cplx(0.0));
  }

  TEST_CASE("invertibility certificate") {
    const auto s = waveform_trig_polynomial(0.0, {{1, 0.0, 1.0}});
    const auto one = PeriodicMatrixFunction::constant(MatrixXcd::Ones(1, 1), 1.0);
    const auto f = place(s, 0, 0, 2, 2) + place(one, 1, 1, 2, 2);
    const auto cert = invertibility_certificate(f);
    CHECK_FALSE(cert.invertible);
    CHECK(cert.det_real);
    CHECK(cert.det_sign_changes >= 1);
    CHECK(cert.min_abs_det < 1e-12);

    const auto g = f + place(PeriodicMatrixFunction::constant(MatrixXcd::Constant(1, 1, 2.0), 1.0), 0, 0, 2, 2);
    const auto ok = invertibility_certificate(g);
    CHECK(ok.invertible);
    CHECK(std::abs(ok.min_abs_det - 1.0) < 1e-9);
    CHECK(std::abs(ok.max_abs_det - 3.0) < 1e-9);
  }

  TEST_CASE("lattice distance") {
    const std::vector<cplx> ex{cplx(1.0, 0.5)};
    CHECK(lattice_distance(cplx(1.0, 0.5 + 4.0 * pi), ex, 2.0 * pi) < 1e-12);
    CHECK(std::abs(lattice_distance(cplx(1.3, 0.5 - 2.0 * pi), ex, 2.0 * pi) - 0.3) < 1e-12);
  }
}

TEST_SUITE("property harmonic-operators") {
  TEST_CASE("frequency shift is skew-adjoint") {
    for (int m : {0, 1, 5, 12}) {
      const MatrixXcd N = frequency_shift(3, m, 2.0 * pi).dense();
      CHECK((N.adjoint() + N).norm() == 0.0);
    }
  }

  TEST_CASE("Toeplitz product consistency away from the truncation edge") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
      const int bf = 2;
      const int bg = 3;
      const auto f = random_trig_matrix(rng, 2, 3, bf);
      const auto g = random_trig_matrix(rng, 3, 2, bg);
      const int m = 8;
      const MatrixXcd prod = toeplitz_lift(f, m).dense * toeplitz_lift(g, m).dense;
      const MatrixXcd lifted = toeplitz_lift(product(f, g), m).dense;
      const int w = 2 * m + 1;
      double worst = 0.0;
      for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
          for (int r = -m; r <= m; ++r) {
            for (int c = -(m - bg); c <= m - bg; ++c) {
              worst = std::max(worst, std::abs(prod(i * w + r + m, j * w + c + m) -
                                               lifted(i * w + r + m, j * w + c + m)));
            }
          }
        }
      }
      CHECK(worst < 1e-12);
    }
  }

  TEST_CASE("lift of a real function is conjugate-centrosymmetric") {
    const auto f = waveform_square(0.2, 1.0, 40);
    const auto L = toeplitz_lift(f, 6).dense;
    const int w = 13;
    for (int r = 0; r < w; ++r) {
      for (int c = 0; c < w; ++c) {
        CHECK(std::abs(L(r, c) - std::conj(L(w - 1 - r, w - 1 - c))) < 1e-15);
      }
    }
  }

  TEST_CASE("lift is linear") {
    const auto f = waveform_triangle(0.0, 1.0, 40);
    const auto g = waveform_square(1.0, -0.5, 40);
    const cplx a(0.5, 2.0);
    const MatrixXcd lhs = toeplitz_lift(a * f + g, 5).dense;
    const MatrixXcd rhs = a * toeplitz_lift(f, 5).dense + toeplitz_lift(g, 5).dense;
    CHECK((lhs - rhs).norm() < 1e-13);
  }
}
