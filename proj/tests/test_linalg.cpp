#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tdr/error.hpp"
#include "tdr/linalg.hpp"

using namespace tdr;

namespace {

double rel_frob(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("sample_mean_cov: two points") {
  Matrix X(2, 1);
  X << 1, 3;
  const auto mc = sample_mean_cov(X);
  CHECK(mc.mean(0) == doctest::Approx(2.0));
  CHECK(mc.cov(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("sample_mean_cov: constant columns give a zero covariance") {
  Matrix X(3, 2);
  X << 1, 0, 1, 0, 1, 0;
  CHECK(sample_mean_cov(X).cov.isZero(0.0));
}

TEST_CASE("sample_mean_cov: matches the double-loop oracle") {
  const Matrix X = oracle::random_matrix(5, 3, 11);
  CHECK(rel_frob(sample_mean_cov(X).cov, oracle::covariance(X)) < 1e-12);
}

TEST_CASE("sample_mean_cov: one row is degenerate") {
  CHECK(code_of([] { sample_mean_cov(Matrix::Ones(1, 2)); }) == ErrorCode::DegenerateInput);
}

TEST_CASE("standardize: scalar column") {
  Matrix X(3, 1);
  X << 1, 2, 3;
  const auto s = standardize(X);
  CHECK(s.Z(0, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(s.Z(1, 0)) < 1e-14);
  CHECK(s.Z(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("standardize: identity covariance, centered input is unchanged") {
  Matrix X(4, 2);
  const double a = std::sqrt(1.5);
  X << a, 0, -a, 0, 0, a, 0, -a;
  const auto s = standardize(X);
  CHECK(rel_frob(s.Z, X) < 1e-12);
}

TEST_CASE("standardize: whitened covariance is the identity") {
  Matrix X = oracle::random_matrix(50, 4, 3);
  X.col(1) += 0.7 * X.col(0);
  X.col(3) = 2.0 * X.col(3) + X.col(2);
  const auto s = standardize(X);
  CHECK(rel_frob(sample_mean_cov(s.Z).cov, Matrix::Identity(4, 4)) < 1e-8);
  CHECK(s.Z.colwise().mean().norm() < 1e-12);
  CHECK(rel_frob(s.sqrt_cov * s.sqrt_cov, s.cov) < 1e-8);
  CHECK(rel_frob(s.inv_sqrt_cov * s.sqrt_cov, Matrix::Identity(4, 4)) < 1e-8);
}

TEST_CASE("standardize: collinear columns are rejected") {
  Matrix X = oracle::random_matrix(20, 3, 5);
  X.col(2) = X.col(0) - X.col(1);
  CHECK(code_of([&] { standardize(X); }) == ErrorCode::SingularCovariance);
}

TEST_CASE("property: inv_sqrt_cov * cov * inv_sqrt_cov = I") {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    const Index p = 1 + seed % 7;
    Matrix X = oracle::random_matrix(40, p, seed);
    X = X * oracle::random_matrix(p, p, seed + 100);
    const auto s = standardize(X);
    CHECK(rel_frob(s.inv_sqrt_cov * s.cov * s.inv_sqrt_cov, Matrix::Identity(p, p)) < 1e-8);
  }
}

TEST_CASE("sym_eigen: diagonal ordered by absolute value") {
  Matrix A = Vector{{1.0, -3.0, 2.0}}.asDiagonal();
  const auto e = sym_eigen(A);
  CHECK(e.values(0) == doctest::Approx(-3.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
  CHECK(e.values(2) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigen: identity") {
  const auto e = sym_eigen(Matrix::Identity(4, 4));
  CHECK((e.values.array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(rel_frob(e.vectors * e.values.asDiagonal() * e.vectors.transpose(),
                 Matrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("sym_eigen: classic 2x2") {
  Matrix A(2, 2);
  A << 2, 1, 1, 2;
  const auto e = sym_eigen(A);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(e.vectors(0, 0) == doctest::Approx(h));
  CHECK(e.vectors(1, 0) == doctest::Approx(h));
  CHECK(e.vectors(0, 1) == doctest::Approx(h));
  CHECK(e.vectors(1, 1) == doctest::Approx(-h));
}

TEST_CASE("sym_eigen: equal magnitudes put the positive value first") {
  Matrix A = Vector{{-2.0, 2.0}}.asDiagonal();
  const auto e = sym_eigen(A);
  CHECK(e.values(0) == doctest::Approx(2.0));
  CHECK(e.values(1) == doctest::Approx(-2.0));
}

TEST_CASE("sym_eigen: non-finite input") {
  Matrix A = Matrix::Identity(2, 2);
  A(0, 1) = A(1, 0) = std::nan("");
  CHECK(code_of([&] { sym_eigen(A); }) == ErrorCode::NonFinite);
}

TEST_CASE("property: sym_eigen reconstruction, orthonormality, ordering, sign") {
  for (unsigned seed = 1; seed <= 30; ++seed) {
    const Index p = 1 + (seed * 7) % 50;
    const Matrix R = oracle::random_matrix(p, p, seed);
    const Matrix A = 0.5 * (R + R.transpose());
    const auto e = sym_eigen(A);
    CHECK(rel_frob(e.vectors * e.values.asDiagonal() * e.vectors.transpose(), A) < 1e-8);
    CHECK(rel_frob(e.vectors.transpose() * e.vectors, Matrix::Identity(p, p)) < 1e-8);
    for (Index k = 1; k < p; ++k) CHECK(std::abs(e.values(k - 1)) >= std::abs(e.values(k)));
    for (Index k = 0; k < p; ++k) {
      for (Index j = 0; j < p; ++j) {
        if (std::abs(e.vectors(j, k)) > 1e-12) {
          CHECK(e.vectors(j, k) > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("avg_sq_canonical_cor: identical blocks give 1") {
  const Matrix A = oracle::random_matrix(30, 2, 7);
  CHECK(avg_sq_canonical_cor(A, A) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("avg_sq_canonical_cor: orthogonal after centering gives 0") {
  Matrix A(4, 1), B(4, 1);
  A << 1, -1, 1, -1;
  B << 1, 1, -1, -1;
  CHECK(std::abs(avg_sq_canonical_cor(A, B)) < 1e-14);
}

TEST_CASE("oracle: K=2 canonical correlations vs the generalized eigenproblem") {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const Matrix A = oracle::random_matrix(100, 2, seed);
    Matrix B = oracle::random_matrix(100, 2, seed + 50);
    B.col(0) += 0.8 * A.col(1);
    B.col(1) -= 0.3 * A.col(0);
    CHECK(avg_sq_canonical_cor(A, B) == doctest::Approx(oracle::avg_sq_canonical_cor(A, B)).epsilon(1e-8));
  }
}

TEST_CASE("property: canonical correlation basis invariance, symmetry and range") {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    const Matrix A = oracle::random_matrix(60, 2, seed);
    Matrix B = oracle::random_matrix(60, 2, seed + 1000);
    B.col(0) += A.col(0);
    const Matrix M = oracle::random_matrix(2, 2, seed + 2000) + 3.0 * Matrix::Identity(2, 2);
    CHECK(std::abs(avg_sq_canonical_cor(A, A * M) - 1.0) < 1e-8);
    const double ab = avg_sq_canonical_cor(A, B);
    CHECK(std::abs(ab - avg_sq_canonical_cor(B, A)) < 1e-10);
    CHECK(std::abs(ab - avg_sq_canonical_cor(A * M, B)) < 1e-8);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("canonical correlations: rank-deficient block is flagged") {
  Matrix A = oracle::random_matrix(20, 2, 1);
  A.col(1) = (2.0 * A.col(0)).array() + 1.0;
  const Matrix B = oracle::random_matrix(20, 2, 2);
  const auto cc = canonical_correlations(A, B);
  CHECK(cc.rank_deficient);
  CHECK(cc.rank == 1);
  CHECK(code_of([&] { avg_sq_canonical_cor(A, B); }) == ErrorCode::RankDeficient);
}

TEST_CASE("squared_correlation: constant vector gives 0") {
  CHECK(squared_correlation(Vector::Ones(5), oracle::random_vector(5, 1)) == 0.0);
  const Vector a = oracle::random_vector(10, 4);
  CHECK(squared_correlation(a, -3.0 * a + Vector::Ones(10)) == doctest::Approx(1.0));
}
