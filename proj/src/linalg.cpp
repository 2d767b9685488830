#include "tdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "tdr/error.hpp"

namespace tdr {

namespace {

constexpr double kPdThreshold = 1e-10;
constexpr double kSignThreshold = 1e-12;
constexpr double kRankThreshold = 1e-10;

Matrix center_columns(const Matrix& A) {
  return A.rowwise() - A.colwise().mean();
}

// Orthonormal basis for the column space, rank-revealing.
Matrix orthonormal_basis(const Matrix& A, Index* rank) {
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(kRankThreshold);
  *rank = qr.rank();
  Matrix thin = Matrix::Identity(A.rows(), *rank);
  return qr.householderQ() * thin;
}

}  // namespace

MeanCov sample_mean_cov(const Matrix& X) {
  const Index n = X.rows();
  if (n < 2) {
    fail(ErrorCode::DegenerateInput,
         "sample covariance needs at least 2 rows, got " + std::to_string(n));
  }
  if (!X.allFinite()) {
    fail(ErrorCode::NonFinite, "predictor matrix contains non-finite entries");
  }
  MeanCov out;
  out.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - out.mean.transpose();
  out.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return out;
}

SymSqrt sym_sqrt(const Matrix& S) {
  if (!S.allFinite()) {
    fail(ErrorCode::NonFinite, "covariance contains non-finite entries");
  }
  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Vector& w = solver.eigenvalues();  // ascending
  const double largest = w.cwiseAbs().maxCoeff();
  if (!(w(0) > kPdThreshold * largest) || largest == 0.0) {
    fail(ErrorCode::SingularCovariance,
         "covariance is not positive definite (smallest eigenvalue " +
             std::to_string(w(0)) + ", largest " + std::to_string(largest) + ")");
  }
  const Matrix& V = solver.eigenvectors();
  SymSqrt out;
  out.sqrt = V * w.cwiseSqrt().asDiagonal() * V.transpose();
  out.inv_sqrt = V * w.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  return out;
}

Standardized standardize(const Matrix& X) {
  MeanCov mc = sample_mean_cov(X);
  SymSqrt roots = sym_sqrt(mc.cov);
  Standardized out;
  out.Z = (X.rowwise() - mc.mean.transpose()) * roots.inv_sqrt;
  out.mean = std::move(mc.mean);
  out.cov = std::move(mc.cov);
  out.sqrt_cov = std::move(roots.sqrt);
  out.inv_sqrt_cov = std::move(roots.inv_sqrt);
  return out;
}

SymEigen sym_eigen(const Matrix& A) {
  if (A.rows() != A.cols()) {
    fail(ErrorCode::DegenerateInput, "sym_eigen needs a square matrix");
  }
  if (!A.allFinite()) {
    fail(ErrorCode::NonFinite, "matrix contains non-finite entries");
  }
  const Matrix sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Vector& w = solver.eigenvalues();
  const Matrix& V = solver.eigenvectors();

  const Index p = w.size();
  std::vector<Index> order(static_cast<size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double fa = std::abs(w(a));
    const double fb = std::abs(w(b));
    if (fa != fb) return fa > fb;
    return w(a) > w(b);
  });

  SymEigen out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  for (Index k = 0; k < p; ++k) {
    const Index src = order[static_cast<size_t>(k)];
    out.values(k) = w(src);
    Vector v = V.col(src);
    for (Index j = 0; j < p; ++j) {
      if (std::abs(v(j)) > kSignThreshold) {
        if (v(j) < 0.0) v = -v;
        break;
      }
    }
    out.vectors.col(k) = v;
  }
  return out;
}

CanonicalCorrelations canonical_correlations(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) {
    fail(ErrorCode::DegenerateInput, "canonical correlation blocks differ in row count");
  }
  if (!A.allFinite() || !B.allFinite()) {
    fail(ErrorCode::NonFinite, "canonical correlation input is not finite");
  }
  Index rank_a = 0;
  Index rank_b = 0;
  const Matrix Qa = orthonormal_basis(center_columns(A), &rank_a);
  const Matrix Qb = orthonormal_basis(center_columns(B), &rank_b);

  CanonicalCorrelations out;
  out.rank = std::min(rank_a, rank_b);
  out.rank_deficient = rank_a < A.cols() || rank_b < B.cols();
  if (out.rank == 0) {
    out.squared = Vector();
    out.mean = 0.0;
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(Qa.transpose() * Qb);
  const Vector s = svd.singularValues().head(out.rank);
  out.squared = s.cwiseProduct(s).cwiseMin(1.0).cwiseMax(0.0);
  out.mean = out.squared.mean();
  return out;
}

double avg_sq_canonical_cor(const Matrix& A, const Matrix& B) {
  const CanonicalCorrelations cc = canonical_correlations(A, B);
  if (cc.rank_deficient) {
    fail(ErrorCode::RankDeficient,
         "centered column block is rank deficient (attained rank " +
             std::to_string(cc.rank) + ")");
  }
  return cc.mean;
}

double squared_correlation(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  const double saa = ac.squaredNorm();
  const double sbb = bc.squaredNorm();
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  const double sab = ac.dot(bc);
  return std::clamp(sab * sab / (saa * sbb), 0.0, 1.0);
}

}  // namespace tdr
