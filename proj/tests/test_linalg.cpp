#include <cmath>
#include <random>

#include <doctest.h>

#include "descent/linalg.hpp"

using namespace descent;
using namespace descent::linalg;

namespace {

Matrix random_symmetric(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = n(rng);
  return 0.5 * (g + g.transpose());
}

Matrix random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = n(rng);
  return g.transpose() * g + 1e-3 * Matrix::Identity(d, d);
}

Matrix random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = n(rng);
  return Eigen::HouseholderQR<Matrix>(g).householderQ();
}

}  // namespace

TEST_CASE("inner product") {
  CHECK(inner(Vector{{1, 2}}, Vector{{3, 4}}) == 11.0);
  CHECK(inner(Vector{{1, 0}}, Vector{{0, 1}}) == 0.0);
  // Hand arithmetic: (-3)^2 + 3.5^2 = 9 + 12.25.
  CHECK(inner(Vector{{-3, 3.5}}, Vector{{-3, 3.5}}) == doctest::Approx(21.25));
  CHECK_THROWS_AS(inner(Vector{{1, 2}}, Vector{{1, 2, 3}}), DimensionMismatch);
}

TEST_CASE("matmul") {
  Matrix a(2, 2);
  a << 20, 7, 5, 5;
  CHECK((matmul(Matrix::Identity(2, 2), a) - a).norm() == 0.0);

  Matrix x(2, 1);
  x << -3, 3.5;
  Matrix ax = matmul(a, x);
  CHECK(ax(0, 0) == doctest::Approx(-35.5));
  CHECK(ax(1, 0) == doctest::Approx(2.5));
  CHECK_THROWS_AS(matmul(a, Matrix::Identity(3, 3)), DimensionMismatch);

  std::mt19937_64 rng(11);
  const SpectralDecomposition s = spectral(random_symmetric(6, rng));
  CHECK((matmul(s.q, Matrix(s.q.transpose())) - Matrix::Identity(6, 6)).norm() <=
        1e-10);
}

TEST_CASE("cholesky fixtures") {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const CholeskyFactor f = cholesky(a);
  CHECK(f.r(0, 0) == doctest::Approx(2.0));
  CHECK(f.r(0, 1) == doctest::Approx(1.0));
  CHECK(f.r(1, 0) == 0.0);
  CHECK(f.r(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK((f.r.transpose() * f.r - a).norm() <= 1e-12 * a.norm());

  const CholeskyFactor id = cholesky(Matrix::Identity(3, 3));
  CHECK((id.r - Matrix::Identity(3, 3)).norm() == 0.0);

  Matrix indef(2, 2);
  indef << 0, 1, 1, 0;
  CHECK_THROWS_AS(cholesky(indef), NotPositiveDefinite);

  Matrix asym(2, 2);
  asym << 1, 2, 3, 40;
  CHECK_THROWS_AS(cholesky(asym), NonSymmetric);
}

TEST_CASE("cholesky round-trip on random SPD matrices") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = random_spd(dim(rng), rng);
    const CholeskyFactor f = cholesky(a);
    CHECK((f.r.transpose() * f.r - a).norm() <= 1e-12 * a.norm());
    CHECK(f.r.diagonal().minCoeff() > 0.0);

    const Vector rhs = Vector::Random(a.rows());
    CHECK((a * cholesky_solve(f, rhs) - rhs).norm() <=
          1e-8 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("spectral fixtures") {
  SUBCASE("already diagonal") {
    const SpectralDecomposition s = spectral(Vector{{4, 40}}.asDiagonal());
    CHECK(s.lambda(0) == doctest::Approx(40.0));
    CHECK(s.lambda(1) == doctest::Approx(4.0));
    Matrix permuted(2, 2);
    permuted << 0, 1, 1, 0;
    CHECK((s.q - permuted).norm() <= 1e-12);
  }
  SUBCASE("2x2 against the quadratic-formula roots") {
    Matrix a(2, 2);
    a << 20, 5, 5, 5;
    // Characteristic polynomial lambda^2 - 25 lambda + 75.
    const double disc = std::sqrt(25.0 * 25.0 - 4.0 * 75.0);
    const double hi = (25.0 + disc) / 2.0;
    const double lo = (25.0 - disc) / 2.0;
    const SpectralDecomposition s = spectral(a);
    CHECK(s.lambda(0) == doctest::Approx(hi).epsilon(1e-12));
    CHECK(s.lambda(1) == doctest::Approx(lo).epsilon(1e-12));
  }
  SUBCASE("indefinite") {
    const SpectralDecomposition s = spectral(Vector{{200, -200}}.asDiagonal());
    CHECK(s.lambda(0) == doctest::Approx(200.0));
    CHECK(s.lambda(1) == doctest::Approx(-200.0));
  }
  SUBCASE("asymmetric input rejected") {
    Matrix asym(2, 2);
    asym << 1, 2, 3, 4;
    CHECK_THROWS_AS(spectral(asym), NonSymmetric);
  }
}

TEST_CASE("spectral round-trip, orthonormality, ordering") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 20);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_symmetric(dim(rng), rng);
    const SpectralDecomposition s = spectral(a);
    const Index d = a.rows();
    CHECK((s.q.transpose() * s.q - Matrix::Identity(d, d)).norm() <= 1e-10);
    CHECK((s.q * s.lambda.asDiagonal() * s.q.transpose() - a).norm() <=
          1e-10 * std::max(a.norm(), 1.0));
    for (Index i = 0; i + 1 < d; ++i) CHECK(s.lambda(i) >= s.lambda(i + 1));
  }
}

TEST_CASE("eigenvalue count equals rank") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 8;
    const int rank = trial % (d + 1);
    const Matrix q = random_orthogonal(d, rng);
    Vector lambda = Vector::Zero(d);
    std::uniform_real_distribution<double> mag(0.5, 5.0);
    for (int i = 0; i < rank; ++i) lambda(i) = mag(rng);
    const Matrix a = q * lambda.asDiagonal() * q.transpose();
    CHECK(spectral_rank(spectral(0.5 * (a + a.transpose()))) == rank);
  }
}

TEST_CASE("eig2x2") {
  SUBCASE("momentum matrix with complex pair") {
    Matrix b(2, 2);
    b << 0.8, -1.6, 0.8, -0.6;
    const Eigenpair2x2 e = eig2x2(b);
    CHECK(std::abs(e.alpha) == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));
    CHECK(std::abs(e.beta) == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));
    CHECK(e.alpha.imag() != 0.0);
  }
  SUBCASE("real pair from the quadratic formula") {
    Matrix b(2, 2);
    b << 0.2, -0.16, 0.2, 0.84;
    // trace 1.04, det 0.2.
    const double disc = std::sqrt(1.04 * 1.04 - 4 * 0.2);
    const Eigenpair2x2 e = eig2x2(b);
    CHECK(e.alpha.real() == doctest::Approx((1.04 + disc) / 2).epsilon(1e-12));
    CHECK(e.beta.real() == doctest::Approx((1.04 - disc) / 2).epsilon(1e-12));
    CHECK(e.alpha.imag() == 0.0);
  }
  SUBCASE("identity") {
    const Eigenpair2x2 e = eig2x2(Matrix::Identity(2, 2));
    CHECK(e.alpha == std::complex<double>(1.0, 0.0));
    CHECK(e.beta == std::complex<double>(1.0, 0.0));
  }
  SUBCASE("trace and determinant identities") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
      Matrix b(2, 2);
      b << n(rng), n(rng), n(rng), n(rng);
      const Eigenpair2x2 e = eig2x2(b);
      const std::complex<double> tr = e.alpha + e.beta;
      const std::complex<double> det = e.alpha * e.beta;
      CHECK(std::abs(tr - (b(0, 0) + b(1, 1))) <= 1e-12 * (1 + std::abs(tr)));
      const double expect_det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
      CHECK(std::abs(det - expect_det) <= 1e-12 * (1 + std::abs(expect_det)));
    }
  }
}

TEST_CASE("condition number") {
  CHECK(condition_number(Vector{{4, 40}}.asDiagonal()) ==
        doctest::Approx(10.0));
  CHECK(condition_number(Matrix::Identity(4, 4)) == doctest::Approx(1.0));

  Matrix a(2, 2);
  a << 20, 5, 5, 5;
  const double disc = std::sqrt(25.0 * 25.0 - 4.0 * 75.0);
  CHECK(condition_number(a) ==
        doctest::Approx((25.0 + disc) / (25.0 - disc)).epsilon(1e-10));

  CHECK_THROWS_AS(condition_number(Vector{{1, 0}}.asDiagonal()), Singular);
}

TEST_CASE("energy norm") {
  CHECK(energy_norm(Vector{{1, 0}}, Vector{{4, 40}}.asDiagonal()) ==
        doctest::Approx(2.0));
  CHECK(energy_norm(Vector::Zero(3), Matrix::Identity(3, 3)) == 0.0);

  Matrix a(2, 2);
  a << 20, 5, 5, 5;
  CHECK(energy_norm(Vector{{1, 1}}, a) ==
        doctest::Approx(std::sqrt(35.0)).epsilon(1e-12));

  CHECK_THROWS_AS(energy_norm(Vector{{0, 1}}, Vector{{1, -1}}.asDiagonal()),
                  NegativeQuadraticForm);
}

TEST_CASE("matrix power") {
  std::mt19937_64 rng(5);
  const Matrix a = random_symmetric(5, rng);
  CHECK((matrix_power(a, 0) - Matrix::Identity(5, 5)).norm() <= 1e-12);
  CHECK((matrix_power(a, 1) - a).norm() <= 1e-10 * a.norm());

  const Matrix cubed = matrix_power(Vector{{2, 3}}.asDiagonal(), 3);
  CHECK(cubed(0, 0) == doctest::Approx(8.0));
  CHECK(cubed(1, 1) == doctest::Approx(27.0));

  // m-fold repeated multiplication as the oracle.
  for (int m = 2; m <= 10; ++m) {
    Matrix expect = Matrix::Identity(5, 5);
    for (int i = 0; i < m; ++i) expect = matmul(expect, a);
    CHECK((matrix_power(a, m) - expect).norm() <= 1e-8 * expect.norm());
  }
  CHECK_THROWS_AS(matrix_power(Matrix{{1, 2}, {3, 4}}, 2), NonSymmetric);
}
