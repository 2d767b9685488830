#pragma once

// Brute-force reference computations. Deliberately naive: explicit loops,
// Gauss-Jordan elimination, no Eigen decompositions.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "tdr/linalg.hpp"

namespace oracle {

using tdr::Index;
using tdr::Matrix;
using tdr::Vector;

inline Matrix random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = dist(gen);
  return M;
}

inline Vector random_vector(Index n, unsigned seed) { return random_matrix(n, 1, seed).col(0); }

inline Matrix covariance(const Matrix& X) {
  const Index n = X.rows(), p = X.cols();
  std::vector<double> mean(static_cast<size_t>(p), 0.0);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) mean[j] += X(i, j);
    mean[j] /= static_cast<double>(n);
  }
  Matrix C = Matrix::Zero(p, p);
  for (Index a = 0; a < p; ++a)
    for (Index b = 0; b < p; ++b) {
      long double s = 0;
      for (Index i = 0; i < n; ++i) s += (X(i, a) - mean[a]) * (X(i, b) - mean[b]);
      C(a, b) = static_cast<double>(s / (n - 1));
    }
  return C;
}

// Gauss-Jordan with partial pivoting.
inline Matrix inverse(Matrix A) {
  const Index p = A.rows();
  Matrix I = Matrix::Identity(p, p);
  for (Index c = 0; c < p; ++c) {
    Index piv = c;
    for (Index r = c + 1; r < p; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    if (A(piv, c) == 0.0) throw std::runtime_error("singular");
    A.row(c).swap(A.row(piv));
    I.row(c).swap(I.row(piv));
    const double d = A(c, c);
    A.row(c) /= d;
    I.row(c) /= d;
    for (Index r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = A(r, c);
      A.row(r) -= f * A.row(c);
      I.row(r) -= f * I.row(c);
    }
  }
  return I;
}

// (1/n) sum_i (y_i - ybar) z_i z_i^T, one entry at a time.
inline Matrix phd_hessian(const Vector& y, const Matrix& Z) {
  const Index n = Z.rows(), p = Z.cols();
  long double ybar = 0;
  for (Index i = 0; i < n; ++i) ybar += y(i);
  ybar /= n;
  Matrix H(p, p);
  for (Index a = 0; a < p; ++a)
    for (Index b = 0; b < p; ++b) {
      long double s = 0;
      for (Index i = 0; i < n; ++i) s += (y(i) - ybar) * Z(i, a) * Z(i, b);
      H(a, b) = static_cast<double>(s / n);
    }
  return H;
}

// Slope part of the normal equations [1 X]'[1 X] beta = [1 X]' y.
inline Vector ols_normal_equations(const Vector& y, const Matrix& X) {
  const Index n = X.rows(), p = X.cols();
  Matrix D(n, p + 1);
  D.col(0).setOnes();
  D.rightCols(p) = X;
  Matrix G = Matrix::Zero(p + 1, p + 1);
  Vector r = Vector::Zero(p + 1);
  for (Index a = 0; a <= p; ++a) {
    for (Index b = 0; b <= p; ++b)
      for (Index i = 0; i < n; ++i) G(a, b) += D(i, a) * D(i, b);
    for (Index i = 0; i < n; ++i) r(a) += D(i, a) * y(i);
  }
  return (inverse(G) * r).tail(p);
}

// Mean of the eigenvalues of Saa^-1 Sab Sbb^-1 Sba, i.e. its trace / K.
inline double avg_sq_canonical_cor(const Matrix& A, const Matrix& B) {
  Matrix AB(A.rows(), A.cols() + B.cols());
  AB << A, B;
  const Matrix S = covariance(AB);
  const Index ka = A.cols(), kb = B.cols();
  const Matrix Saa = S.topLeftCorner(ka, ka), Sbb = S.bottomRightCorner(kb, kb);
  const Matrix Sab = S.topRightCorner(ka, kb);
  const Matrix M = inverse(Saa) * Sab * inverse(Sbb) * Sab.transpose();
  return M.trace() / static_cast<double>(std::min(ka, kb));
}

// rho_i by explicit leave-one-out refits of `fit`.
template <typename Fit>
Vector naive_rho(const Vector& y, const Matrix& X, Fit&& fit) {
  const Index n = X.rows(), p = X.cols();
  const Matrix B = fit(y, X);
  Vector rho(n);
  for (Index i = 0; i < n; ++i) {
    Vector yi(n - 1);
    Matrix Xi(n - 1, p);
    for (Index r = 0, k = 0; r < n; ++r) {
      if (r == i) continue;
      yi(k) = y(r);
      Xi.row(k) = X.row(r);
      ++k;
    }
    const Matrix Bi = fit(yi, Xi);
    const double r2 = avg_sq_canonical_cor(X * B, X * Bi);
    rho(i) = std::max(0.0, (n - 1.0) * (n - 1.0) * (1.0 - r2));
  }
  return rho;
}

}  // namespace oracle
