#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "qpr/multimode.hpp"
#include "qpr/observables.hpp"
#include "qpr/overlap.hpp"

using namespace qpr;

namespace {

CouplingMatricesd pair_matrices(double beta0, double beta1) {
  Eigen::MatrixXd k0(2, 2), k1(2, 2);
  k0 << 1.0, beta0, beta0, 1.0;
  k1 << 0.0, beta1, beta1, 0.0;
  return {k0, k1};
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

}  // namespace

TEST_CASE("two coupled oscillators reduce to the +/- pair") {
  const auto red = reduce(pair_matrices(0.05, 0.02));
  // all four are exact: the quarter-turn rotation updates the diagonals
  // as app -+ t*apq and the hollow companion through 2t/(1+t^2) = 1
  CHECK(red.lambda0[0] == 0.95);
  CHECK(red.lambda0[1] == 1.05);
  CHECK(red.lambda1[0] == -0.02);
  CHECK(red.lambda1[1] == 0.02);
  CHECK(red.residual == 0.0);
  // pi/4 rotation
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(red.eigvecs(i, j)) ==
            doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("degenerate static matrix still lands on the +/- modes") {
  const auto red = reduce(pair_matrices(0.0, 0.02));
  CHECK(red.lambda0[0] == 1.0);
  CHECK(red.lambda0[1] == 1.0);
  CHECK(red.lambda1[0] == -0.02);
  CHECK(red.lambda1[1] == 0.02);
  CHECK(red.residual == 0.0);
}

TEST_CASE("zero modulation is accepted for any static matrix") {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd k0 = random_symmetric(4, rng);
  k0 = (k0 + 5.0 * Eigen::MatrixXd::Identity(4, 4)).eval();  // positive definite
  const CouplingMatricesd cm{k0, Eigen::MatrixXd::Zero(4, 4)};
  const auto red = reduce(cm);
  CHECK(red.lambda1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(red.residual == 0.0);
}

TEST_CASE("ring of three identical oscillators matches the analytic spectrum") {
  const double b0 = 0.04, b1 = 0.015;
  Eigen::MatrixXd k0(3, 3), k1(3, 3);
  k0 << 1, b0, b0, b0, 1, b0, b0, b0, 1;
  k1 << 0, b1, b1, b1, 0, b1, b1, b1, 0;
  const auto red = reduce(CouplingMatricesd{k0, k1});
  // characteristic polynomial of a circulant: 1 + 2 b0 and twice 1 - b0
  CHECK(red.lambda0[0] == doctest::Approx(1 - b0).epsilon(1e-14));
  CHECK(red.lambda0[1] == doctest::Approx(1 - b0).epsilon(1e-14));
  CHECK(red.lambda0[2] == doctest::Approx(1 + 2 * b0).epsilon(1e-14));
  CHECK(red.lambda1[0] == doctest::Approx(-b1).epsilon(1e-12));
  CHECK(red.lambda1[1] == doctest::Approx(-b1).epsilon(1e-12));
  CHECK(red.lambda1[2] == doctest::Approx(2 * b1).epsilon(1e-12));
  CHECK(red.residual < 1e-12);
}

TEST_CASE("non-commuting matrices are rejected") {
  Eigen::MatrixXd k0(2, 2), k1(2, 2);
  k0 << 1.0, 0.05, 0.05, 1.2;
  k1 << 0.0, 0.01, 0.01, 0.0;
  CHECK_THROWS_AS(reduce(CouplingMatricesd{k0, k1}),
                  NotSimultaneouslyDiagonalizable);
}

TEST_CASE("indefinite static matrix is rejected") {
  Eigen::MatrixXd k0(2, 2);
  k0 << 1.0, 1.5, 1.5, 1.0;
  CHECK_THROWS_AS(reduce(CouplingMatricesd{k0, Eigen::MatrixXd::Zero(2, 2)}),
                  NotPositiveDefinite);
}

TEST_CASE("asymmetric or mismatched inputs fail validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.3, 0.2, 1.0;
  CHECK_THROWS_AS((CouplingMatricesd{bad, Eigen::MatrixXd::Zero(2, 2)}.validate()),
                  ConfigError);
  CHECK_THROWS_AS(
      (CouplingMatricesd{Eigen::MatrixXd::Identity(2, 2),
                         Eigen::MatrixXd::Zero(3, 3)}
           .validate()),
      ConfigError);
}

TEST_CASE("jacobi eigensolver agrees with Eigen on random matrices") {
  std::mt19937_64 rng(99);
  for (int n : {2, 3, 6, 9}) {
    const Eigen::MatrixXd a = random_symmetric(n, rng);
    const auto [vals, vecs] = jacobi_eigen_symmetric<double>(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
    for (int i = 0; i < n; ++i)
      CHECK(vals[i] == doctest::Approx(ref.eigenvalues()[i]).epsilon(1e-12));
    CHECK((vecs.transpose() * vecs - Eigen::MatrixXd::Identity(n, n))
              .lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((vecs * vals.asDiagonal() * vecs.transpose() - a)
              .lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("reduction reconstructs the static matrix") {
  const auto cm = pair_matrices(0.07, 0.01);
  const auto red = reduce(cm);
  CHECK((red.eigvecs * red.lambda0.asDiagonal() * red.eigvecs.transpose() -
         cm.k0)
            .lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((red.eigvecs.transpose() * red.eigvecs -
         Eigen::MatrixXd::Identity(2, 2))
            .lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("undriven reduced modes stay in their ground states") {
  std::mt19937_64 rng(17);
  Eigen::MatrixXd k0 = random_symmetric(3, rng) * 0.05;
  k0.diagonal().setOnes();
  k0 = ((k0 + k0.transpose()) / 2).eval();
  const auto red = reduce(CouplingMatricesd{k0, Eigen::MatrixXd::Zero(3, 3)});
  const auto states = evolve_all(red, DriveClock<double>{0.0, 10},
                                 IntegratorConfig<double>::adaptive());
  const auto modes = red.modes();
  for (size_t i = 0; i < states.size(); ++i) {
    CHECK(std::abs(states[i].b - std::complex<double>(modes[i].omega0 / 2, 0)) <
          1e-9);
  }
}

TEST_CASE("two-mode pipeline and reduction pipeline agree") {
  const double beta0 = 0.05, beta1 = 0.02;
  DriveSpec<double> d{beta0, beta1, 0.049, 20};
  const auto cfg = IntegratorConfig<double>::adaptive(1e-11, 1e-14);

  const auto red = reduce(pair_matrices(beta0, beta1));
  const auto states = evolve_all(red, d.clock(), cfg);
  const auto direct_p = evolve(plus_mode(d), d, cfg);
  const auto direct_m = evolve(minus_mode(d), d, cfg);

  CHECK(std::abs(states[1].b - direct_p.b) < 1e-10);
  CHECK(std::abs(states[0].b - direct_m.b) < 1e-10);

  const auto modes = red.modes();
  const auto grid_red = spectrum_grid(
      overlap_coefficients(states[1], modes[1], 32),
      overlap_coefficients(states[0], modes[0], 32));
  const auto grid_direct = spectrum_grid(
      overlap_coefficients(direct_p, plus_mode(d), 32),
      overlap_coefficients(direct_m, minus_mode(d), 32));
  CHECK((grid_red.probs - grid_direct.probs).lpNorm<Eigen::Infinity>() <
        1e-10);
}

TEST_CASE("per-mode parity holds for reduced systems") {
  const auto red = reduce(pair_matrices(0.03, 0.015));
  const auto states = evolve_all(red, DriveClock<double>{0.01, 25},
                                 IntegratorConfig<double>::adaptive());
  const auto modes = red.modes();
  for (size_t i = 0; i < states.size(); ++i) {
    const auto set = overlap_coefficients(states[i], modes[i], 32);
    for (int n = 1; n <= 32; n += 2)
      CHECK(set.c[n] == std::complex<double>(0, 0));
  }
}

TEST_CASE("selective excitation in an unequal-coupling triangle") {
  // scalene triangle: all three modes modulated, distinct frequencies
  Eigen::MatrixXd b0(3, 3);
  b0 << 0, 0.08, 0.03, 0.08, 0, 0.05, 0.03, 0.05, 0;
  const Eigen::MatrixXd k0 = Eigen::MatrixXd::Identity(3, 3) + b0;
  const Eigen::MatrixXd k1 = 0.3 * b0;
  const auto red = reduce(CouplingMatricesd{k0, k1});
  const auto modes = red.modes();

  // windows must be pairwise disjoint
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const auto wi = predict_window(modes[size_t(i)]);
      const auto wj = predict_window(modes[size_t(j)]);
      CHECK((wi.hi() < wj.lo() || wj.hi() < wi.lo()));
    }

  // drive at mode 0's center: only mode 0 leaves its ground state
  const auto w0 = predict_window(modes[0]);
  const auto states = evolve_all(red, DriveClock<double>{w0.center, 60},
                                 IntegratorConfig<double>::adaptive(1e-10, 1e-13));
  const auto driven = overlap_coefficients(states[0], modes[0], 32);
  const auto idle1 = overlap_coefficients(states[1], modes[1], 32);
  const auto idle2 = overlap_coefficients(states[2], modes[2], 32);
  CHECK(std::norm(driven.c[0]) < 0.75);
  CHECK(std::norm(idle1.c[0]) > 0.9);
  CHECK(std::norm(idle2.c[0]) > 0.9);
}
