#pragma once

#include <Eigen/Dense>

namespace tdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct MeanCov {
  Vector mean;
  Matrix cov;  // divisor n - 1
};

/// Column means and sample covariance (divisor n - 1). Throws DegenerateInput
/// when there are fewer than two rows.
MeanCov sample_mean_cov(const Matrix& X);

struct Standardized {
  Matrix Z;             // (x_i - mean) * cov^{-1/2}, row per observation
  Vector mean;
  Matrix cov;
  Matrix sqrt_cov;
  Matrix inv_sqrt_cov;
};

/// Whitens X. The covariance must be positive definite: its smallest
/// eigenvalue has to exceed 1e-10 times the largest, otherwise
/// SingularCovariance is thrown (no silent ridge).
Standardized standardize(const Matrix& X);

struct SymSqrt {
  Matrix sqrt;
  Matrix inv_sqrt;
};

/// Symmetric square root and inverse square root of a positive definite matrix.
SymSqrt sym_sqrt(const Matrix& S);

struct SymEigen {
  Vector values;   // ordered by |value| descending
  Matrix vectors;  // orthonormal columns
};

/// Eigendecomposition of a symmetric matrix (the input is symmetrized first).
///
/// Ordering is by absolute eigenvalue, descending. Ties in |value| are broken
/// by signed value, descending. Each eigenvector is flipped so that its first
/// component with magnitude above 1e-12 is positive.
SymEigen sym_eigen(const Matrix& A);

struct CanonicalCorrelations {
  Vector squared;            // squared canonical correlations, descending
  double mean = 0.0;         // mean over the attained rank
  Index rank = 0;            // min of the two centered column ranks
  bool rank_deficient = false;
};

/// Squared canonical correlations between the column spaces of the centered
/// A and B. Both must have the same number of rows.
CanonicalCorrelations canonical_correlations(const Matrix& A, const Matrix& B);

/// Mean squared canonical correlation in [0, 1]. Throws RankDeficient when
/// either centered block has column rank below its column count; use
/// canonical_correlations() to get the flagged value instead.
double avg_sq_canonical_cor(const Matrix& A, const Matrix& B);

/// Squared Pearson correlation of two vectors (0 if either is constant).
double squared_correlation(const Vector& a, const Vector& b);

}  // namespace tdr
