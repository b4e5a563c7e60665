#include <catch_amalgamated.hpp>

#include "darkpath/lambda_system.hpp"
#include "darkpath/operator_algebra.hpp"
#include "support.hpp"

using namespace darkpath;
using Catch::Approx;

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_CASE("eigendecompose: diagonal matrix") {
  Matrix h = Matrix::Zero(2, 2);
  h(1, 1) = 1;
  const SpectrumSnapshot snap = eigendecompose(h);
  CHECK(snap.values[0] == Approx(0.0).margin(1e-14));
  CHECK(snap.values[1] == Approx(1.0).margin(1e-14));
  CHECK(std::abs(snap.vectors(0, 0)) == Approx(1.0).margin(1e-12));
  CHECK(std::abs(snap.vectors(1, 1)) == Approx(1.0).margin(1e-12));
}

TEST_CASE("eigendecompose: pauli-x") {
  const SpectrumSnapshot snap = eigendecompose(pauli_x());
  CHECK(snap.values[0] == Approx(-1.0));
  CHECK(snap.values[1] == Approx(1.0));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int n = 0; n < 2; ++n)
    for (int r = 0; r < 2; ++r)
      CHECK(std::abs(snap.vectors(r, n)) == Approx(inv_sqrt2).margin(1e-12));
  CHECK(std::abs(snap.vectors.col(0).dot(snap.vectors.col(1))) < 1e-12);
}

TEST_CASE("eigendecompose: lambda single-excitation block at theta = pi/4") {
  const double theta = kPi / 4;
  HamiltonianFamily fam = lambda_block_family();
  const RealVector g = Eigen::Vector2d(std::sin(theta), std::cos(theta));
  const SpectrumSnapshot snap = eigendecompose(fam.hamiltonian(g));
  CHECK(snap.values[0] == Approx(-1.0).margin(1e-12));
  CHECK(snap.values[1] == Approx(0.0).margin(1e-12));
  CHECK(snap.values[2] == Approx(1.0).margin(1e-12));
  // Compare against the closed-form eigenvectors up to phase.
  const SpectrumSnapshot exact = lambda_block_snapshot(theta, 1.0);
  for (int n = 0; n < 3; ++n)
    CHECK(std::abs(exact.state(n).dot(snap.state(n))) == Approx(1.0).margin(1e-12));
}

TEST_CASE("eigendecompose: reconstruction property for random Hermitians") {
  auto gen = testing::rng(11);
  for (int d = 2; d <= 8; ++d) {
    for (int rep = 0; rep < 4; ++rep) {
      const Matrix h = testing::random_hermitian(d, gen);
      const SpectrumSnapshot snap = eigendecompose(h);
      const Matrix rebuilt =
          snap.vectors * snap.values.asDiagonal().toDenseMatrix().cast<complexd>() *
          snap.vectors.adjoint();
      CHECK((rebuilt - h).cwiseAbs().maxCoeff() <= 1e-10 * matrix_scale(h));
      CHECK((snap.vectors.adjoint() * snap.vectors - Matrix::Identity(d, d))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
      for (int n = 0; n < d; ++n) {
        const double resid = (h * snap.state(n) - snap.values[n] * snap.state(n)).norm();
        CHECK(resid <= 1e-10 * std::max(1.0, h.norm()));
      }
    }
  }
}

TEST_CASE("eigendecompose: gauge continuity along a smooth path") {
  auto gen = testing::rng(12);
  const Matrix a = testing::random_hermitian(4, gen);
  const Matrix b = testing::random_hermitian(4, gen, 0.3);
  SpectrumSnapshot prev = eigendecompose(a);
  for (int k = 1; k <= 100; ++k) {
    const double s = k / 100.0;
    const SpectrumSnapshot cur = eigendecompose(a + s * b, &prev);
    for (int n = 0; n < 4; ++n) {
      const complexd o = prev.state(n).dot(cur.state(n));
      CHECK(o.real() > 0);
    }
    prev = cur;
  }
}

TEST_CASE("eigendecompose: rejects non-Hermitian input") {
  Matrix h(2, 2);
  h << 0, 1, 0, 0;
  CHECK_THROWS_AS(eigendecompose(h), std::invalid_argument);
}

TEST_CASE("lindblad_rhs: purely coherent evolution") {
  Matrix rho(2, 2);
  rho << 0.5, 0.5, 0.5, 0.5;  // |+><+|
  const Matrix rhs = lindblad_rhs(rho, pauli_z(), std::vector<LindbladChannel>{});
  const complexd mi(0, -1);
  const Matrix expected = mi * (pauli_z() * rho - rho * pauli_z());
  CHECK((rhs - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lindblad_rhs: decay generator") {
  const double gamma = 0.37;
  Matrix sm = Matrix::Zero(2, 2);
  sm(0, 1) = 1;  // |g><e| with basis (g, e)
  Matrix rho = Matrix::Zero(2, 2);
  rho(1, 1) = 1;
  const std::vector<LindbladChannel> ch = {{sm, gamma}};
  const Matrix rhs = lindblad_rhs(rho, Matrix::Zero(2, 2), ch);
  CHECK(rhs(1, 1).real() == Approx(-gamma));
  CHECK(std::abs(rhs.trace()) < 1e-15);
}

TEST_CASE("lindblad_rhs: trace-free and Hermitian for the lambda generator") {
  LambdaParams p;
  p.gamma1_R = 2.5e-3;
  p.gamma2_R = 2e-3;
  p.gamma1_phi = 1e-3;
  p.gamma2_phi = 0.5e-3;
  p.kappa_R = 0.1;
  p.kappa_phi = 0.02;
  const HamiltonianFamily fam = lambda_family(p);
  auto gen = testing::rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix rho = testing::random_density(4, gen);
    const Matrix h = fam.hamiltonian(lambda_controls(0.3 + 0.05 * rep, p));
    const Matrix rhs = lindblad_rhs(rho, h, fam.channels);
    CHECK(std::abs(rhs.trace()) <= 1e-12 * matrix_scale(rhs));
    CHECK(hermiticity_error(rhs) <= 1e-12 * matrix_scale(rhs));
  }
}

TEST_CASE("lindblad_rhs: rejects bad input") {
  Matrix rho = Matrix::Identity(2, 2);
  Matrix h3 = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(lindblad_rhs(rho, h3, std::vector<LindbladChannel>{}),
                  std::invalid_argument);
  const std::vector<LindbladChannel> bad = {{pauli_x(), -1.0}};
  CHECK_THROWS_AS(lindblad_rhs(rho, Matrix::Zero(2, 2), bad), std::invalid_argument);
}

TEST_CASE("expectation: basics") {
  Vector zero_state(2);
  zero_state << 1, 0;
  CHECK(expectation(pauli_z(), zero_state).real() == Approx(1.0));
  auto gen = testing::rng(14);
  const Matrix rho = testing::random_density(3, gen);
  CHECK(expectation(Matrix::Identity(3, 3), rho).real() == Approx(1.0).margin(1e-12));
  // Hermitian observable on a random state: expectation real.
  const Matrix a = testing::random_hermitian(5, gen);
  const Vector psi = testing::random_state(5, gen);
  CHECK(std::abs(expectation(a, psi).imag()) < 1e-12 * matrix_scale(a));
  Vector wrong(4);
  CHECK_THROWS_AS(expectation(a, wrong), std::invalid_argument);
}

TEST_CASE("expectation: transported state carries no bus photon") {
  Matrix photon_number = Matrix::Zero(3, 3);
  photon_number(2, 2) = 1;
  for (int i = 0; i <= 32; ++i) {
    const double theta = kHalfPi * i / 32;
    const Vector e1 = lambda_block_snapshot(theta, 1.0).state(1);
    CHECK(std::abs(expectation(photon_number, e1)) < 1e-14);
  }
}

TEST_CASE("check_density flags defects") {
  auto gen = testing::rng(15);
  const Matrix good = testing::random_density(4, gen);
  CHECK(check_density(good).ok);
  Matrix traceless = good * 0.5;
  CHECK_FALSE(check_density(traceless).ok);
  Matrix negative = good - 0.5 * Matrix::Identity(4, 4);
  CHECK_FALSE(check_density(negative).ok);
}
