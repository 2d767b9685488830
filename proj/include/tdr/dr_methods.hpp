#pragma once

#include <string_view>
#include <vector>

#include "tdr/linalg.hpp"

namespace tdr {

enum class DrMethod { Ols, Rlm, Phd, PhdDeflated };

std::string_view to_string(DrMethod method);

/// Estimated e.d.r. directions.
///
/// `directions` holds the x-scale columns (gamma_k = Sigma^{-1/2} eta_k for PHD);
/// `z_directions` holds the unit z-scale columns (eta_k, or the normalized
/// b_z = Sigma^{1/2} b / |Sigma^{1/2} b| for OLS/RLM). `eigenvalues` carries
/// the whole PHD spectrum ordered by absolute value and is empty for OLS/RLM.
struct DrFit {
  Matrix directions;
  Matrix z_directions;
  Vector eigenvalues;
  DrMethod method = DrMethod::Ols;
  bool zero_slope = false;  // OLS/RLM slope indistinguishable from 0
  bool converged = true;    // RLM only
  int iterations = 0;       // RLM only
};

struct RankTest {
  Index k = 0;
  double statistic = 0.0;
  Index df = 0;
  double p_value = 1.0;
};

struct HuberOptions {
  double tuning = 1.345;
  int max_iterations = 50;
  double tolerance = 1e-8;
};

/// OLS slope b = Sigma^{-1} Sigma_xy on the x-scale. A slope whose fitted
/// values have sd below 1e-12 sd(y) sets `zero_slope` and leaves the
/// z-direction at 0.
DrFit ols_slope(const Vector& y, const Matrix& X);

/// Huber M-estimator slope by IRLS, scale = 1.4826 * MAD of the residuals,
/// refreshed every iteration. Sets `converged = false` if the relative
/// coefficient change is still above tolerance after max_iterations.
DrFit rlm_slope(const Vector& y, const Matrix& X, const HuberOptions& options = {});

/// (1/n) sum (y_i - ybar) z_i z_i^T, accumulated in row order.
Matrix phd_hessian(const Vector& y, const Matrix& Z);

DrFit phd_fit(const Vector& y, const Matrix& X, Index K);

/// Q M Q with Q = I - u u^T. u is renormalized when |u| is within 1e-6 of
/// one; otherwise NotUnit is thrown.
Matrix deflate(const Matrix& M, const Vector& u);

/// PHD on the hessian deflated by every column of `prior_z_dirs` (the
/// columns are orthonormalized first). Returns the leading K directions.
DrFit phd_fit_deflated(const Vector& y, const Matrix& X, const Matrix& prior_z_dirs,
                       Index K = 1);

/// Sample variance, divisor n - 1.
double sample_variance(const Vector& y);

/// t_k = n / (2 s2y) sum_{j>k} lambda_j^2, chi-square with (p-k+1)(p-k)/2 df.
RankTest rank_test(const Vector& eigenvalues, Index k, Index n, double s2y);

/// rank_test for k = 0 .. p-1.
std::vector<RankTest> rank_test_table(const Vector& eigenvalues, Index n, double s2y);

// Moment form of PHD, shared by the leave-one-out refits. `weighted` is
// (1/n) sum (y_i - ybar)(x_i - xbar)(x_i - xbar)^T on the x-scale, so that
// the z-scale hessian is Sigma^{-1/2} weighted Sigma^{-1/2}.
struct PhdMoments {
  Index n = 0;
  Vector mean;
  Matrix cov;
  Matrix weighted;
};

PhdMoments phd_moments(const Vector& y, const Matrix& X);

/// PHD from moments. Priors are x-scale directions; each is mapped to the
/// z-scale with Sigma^{1/2}, orthonormalized and deflated.
DrFit phd_from_moments(const PhdMoments& moments, Index K,
                       const Matrix& prior_x_dirs = Matrix());

/// Modified Gram-Schmidt on the columns. DegenerateInput if a column is
/// (numerically) dependent on the previous ones.
Matrix orthonormalize_columns(const Matrix& A);

}  // namespace tdr
