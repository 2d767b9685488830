#include "tdr/dr_methods.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "tdr/error.hpp"

namespace tdr {

namespace {

constexpr double kZeroSlope = 1e-12;
constexpr double kUnitTolerance = 1e-6;
constexpr double kMadToSigma = 1.482602218505602;

void check_shapes(const Vector& y, const Matrix& X) {
  if (y.size() != X.rows()) {
    fail(ErrorCode::DegenerateInput, "response length " + std::to_string(y.size()) +
                                         " does not match " + std::to_string(X.rows()) +
                                         " predictor rows");
  }
  if (!y.allFinite()) fail(ErrorCode::NonFinite, "response contains non-finite values");
}

void check_more_rows_than_cols(const Matrix& X) {
  if (X.rows() <= X.cols()) {
    fail(ErrorCode::DegenerateInput, "need n > p (n = " + std::to_string(X.rows()) +
                                         ", p = " + std::to_string(X.cols()) + ")");
  }
}

// Packages an x-scale slope: z-direction Sigma^{1/2} b / |Sigma^{1/2} b|.
DrFit package_slope(const Vector& b, const Matrix& cov, const Matrix& sqrt_cov,
                    double sd_y, DrMethod method) {
  DrFit fit;
  fit.method = method;
  fit.directions = b;
  const double fitted_sd = std::sqrt(std::max(0.0, b.dot(cov * b)));
  if (sd_y == 0.0 || fitted_sd <= kZeroSlope * sd_y) {
    fit.zero_slope = true;
    fit.z_directions = Vector::Zero(b.size());
    return fit;
  }
  const Vector bz = sqrt_cov * b;
  fit.z_directions = bz / bz.norm();
  return fit;
}

double median(Eigen::ArrayXd values) {
  const auto n = static_cast<size_t>(values.size());
  double* data = values.data();
  std::nth_element(data, data + n / 2, data + n);
  const double upper = data[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(data, data + n / 2);
  return 0.5 * (lower + upper);
}

// Leading K columns of an absolute-ordered eigendecomposition, mapped back.
DrFit finish_phd(const Matrix& hessian_z, const Matrix& inv_sqrt_cov, Index K,
                 DrMethod method) {
  const Index p = hessian_z.rows();
  if (K < 1 || K > p) {
    fail(ErrorCode::InvalidConfig, "K must lie in [1, p], got " + std::to_string(K));
  }
  const SymEigen eig = sym_eigen(hessian_z);
  DrFit fit;
  fit.method = method;
  fit.eigenvalues = eig.values;
  fit.z_directions = eig.vectors.leftCols(K);
  fit.directions = inv_sqrt_cov * fit.z_directions;
  return fit;
}

}  // namespace

std::string_view to_string(DrMethod method) {
  switch (method) {
    case DrMethod::Ols: return "OLS";
    case DrMethod::Rlm: return "RLM";
    case DrMethod::Phd: return "PHD";
    case DrMethod::PhdDeflated: return "PHD_deflated";
  }
  return "?";
}

double sample_variance(const Vector& y) {
  if (y.size() < 2) return 0.0;
  const double m = y.mean();
  return (y.array() - m).square().sum() / static_cast<double>(y.size() - 1);
}

DrFit ols_slope(const Vector& y, const Matrix& X) {
  check_shapes(y, X);
  check_more_rows_than_cols(X);
  const MeanCov mc = sample_mean_cov(X);
  const SymSqrt roots = sym_sqrt(mc.cov);
  const Matrix centered = X.rowwise() - mc.mean.transpose();
  const Vector cov_xy =
      centered.transpose() * (y.array() - y.mean()).matrix() / static_cast<double>(X.rows() - 1);
  const Vector b = mc.cov.ldlt().solve(cov_xy);
  return package_slope(b, mc.cov, roots.sqrt, std::sqrt(sample_variance(y)), DrMethod::Ols);
}

DrFit rlm_slope(const Vector& y, const Matrix& X, const HuberOptions& options) {
  check_shapes(y, X);
  check_more_rows_than_cols(X);
  const Index n = X.rows();
  const Index p = X.cols();
  const MeanCov mc = sample_mean_cov(X);
  const SymSqrt roots = sym_sqrt(mc.cov);

  Matrix design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = X;

  Vector beta = (design.transpose() * design).ldlt().solve(design.transpose() * y);
  Vector weights = Vector::Ones(n);
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::ArrayXd resid = (y - design * beta).array();
    const double scale = kMadToSigma * median((resid - median(resid)).abs());
    if (!(scale > 0.0)) {
      converged = true;
      break;
    }
    const double cutoff = options.tuning * scale;
    for (Index i = 0; i < n; ++i) {
      const double a = std::abs(resid(i));
      weights(i) = a <= cutoff ? 1.0 : cutoff / a;
    }
    const Matrix wd = design.array().colwise() * weights.array();
    const Vector next = (wd.transpose() * design).ldlt().solve(wd.transpose() * y);
    const double change = (next - beta).norm();
    const double size = std::max(beta.norm(), next.norm());
    beta = next;
    if (change <= options.tolerance * (size > 0.0 ? size : 1.0)) {
      converged = true;
      ++iter;
      break;
    }
  }
  DrFit fit = package_slope(beta.tail(p), mc.cov, roots.sqrt, std::sqrt(sample_variance(y)),
                            DrMethod::Rlm);
  fit.converged = converged;
  fit.iterations = iter;
  return fit;
}

Matrix phd_hessian(const Vector& y, const Matrix& Z) {
  check_shapes(y, Z);
  const Index n = Z.rows();
  const Index p = Z.cols();
  const double ybar = y.mean();
  Matrix H = Matrix::Zero(p, p);
  for (Index i = 0; i < n; ++i) {
    const double w = y(i) - ybar;
    const auto z = Z.row(i);
    for (Index a = 0; a < p; ++a) {
      const double wa = w * z(a);
      for (Index b = 0; b <= a; ++b) H(a, b) += wa * z(b);
    }
  }
  for (Index a = 0; a < p; ++a) {
    for (Index b = 0; b < a; ++b) H(b, a) = H(a, b);
  }
  return H / static_cast<double>(n);
}

DrFit phd_fit(const Vector& y, const Matrix& X, Index K) {
  check_shapes(y, X);
  check_more_rows_than_cols(X);
  const Standardized s = standardize(X);
  return finish_phd(phd_hessian(y, s.Z), s.inv_sqrt_cov, K, DrMethod::Phd);
}

Matrix deflate(const Matrix& M, const Vector& u) {
  if (u.size() != M.rows() || M.rows() != M.cols()) {
    fail(ErrorCode::DegenerateInput, "deflate: dimension mismatch");
  }
  const double norm = u.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kUnitTolerance) {
    fail(ErrorCode::NotUnit, "deflation vector has norm " + std::to_string(norm));
  }
  const Vector v = u / norm;
  const Matrix Q = Matrix::Identity(M.rows(), M.cols()) - v * v.transpose();
  const Matrix out = Q * M * Q;
  return 0.5 * (out + out.transpose());
}

Matrix orthonormalize_columns(const Matrix& A) {
  Matrix Q = A;
  for (Index j = 0; j < Q.cols(); ++j) {
    const double original = Q.col(j).norm();
    for (Index k = 0; k < j; ++k) Q.col(j) -= Q.col(k).dot(Q.col(j)) * Q.col(k);
    const double norm = Q.col(j).norm();
    if (!(norm > 1e-10 * std::max(original, 1e-300))) {
      fail(ErrorCode::DegenerateInput, "prior directions are linearly dependent");
    }
    Q.col(j) /= norm;
  }
  return Q;
}

DrFit phd_fit_deflated(const Vector& y, const Matrix& X, const Matrix& prior_z_dirs, Index K) {
  check_shapes(y, X);
  check_more_rows_than_cols(X);
  if (prior_z_dirs.rows() != X.cols()) {
    fail(ErrorCode::DegenerateInput, "prior directions must have p rows");
  }
  const Standardized s = standardize(X);
  Matrix H = phd_hessian(y, s.Z);
  const Matrix U = orthonormalize_columns(prior_z_dirs);
  for (Index j = 0; j < U.cols(); ++j) H = deflate(H, U.col(j));
  return finish_phd(H, s.inv_sqrt_cov, K, DrMethod::PhdDeflated);
}

RankTest rank_test(const Vector& eigenvalues, Index k, Index n, double s2y) {
  const Index p = eigenvalues.size();
  if (k < 0 || k >= p) {
    fail(ErrorCode::InvalidConfig, "rank test needs 0 <= k < p");
  }
  if (!(s2y > 0.0)) fail(ErrorCode::ZeroVariance, "response variance is zero");
  RankTest out;
  out.k = k;
  const double tail = eigenvalues.tail(p - k).squaredNorm();
  out.statistic = static_cast<double>(n) / (2.0 * s2y) * tail;
  out.df = (p - k + 1) * (p - k) / 2;
  out.p_value = out.statistic > 0.0
                    ? boost::math::gamma_q(0.5 * static_cast<double>(out.df), 0.5 * out.statistic)
                    : 1.0;
  return out;
}

std::vector<RankTest> rank_test_table(const Vector& eigenvalues, Index n, double s2y) {
  std::vector<RankTest> table;
  for (Index k = 0; k < eigenvalues.size(); ++k) table.push_back(rank_test(eigenvalues, k, n, s2y));
  return table;
}

PhdMoments phd_moments(const Vector& y, const Matrix& X) {
  check_shapes(y, X);
  const MeanCov mc = sample_mean_cov(X);
  PhdMoments m;
  m.n = X.rows();
  m.mean = mc.mean;
  m.cov = mc.cov;
  const Matrix centered = X.rowwise() - mc.mean.transpose();
  const Vector w = y.array() - y.mean();
  m.weighted = centered.transpose() * (centered.array().colwise() * w.array()).matrix() /
               static_cast<double>(m.n);
  return m;
}

DrFit phd_from_moments(const PhdMoments& moments, Index K, const Matrix& prior_x_dirs) {
  const SymSqrt roots = sym_sqrt(moments.cov);
  Matrix H = roots.inv_sqrt * moments.weighted * roots.inv_sqrt;
  if (prior_x_dirs.cols() == 0) {
    return finish_phd(H, roots.inv_sqrt, K, DrMethod::Phd);
  }
  const Matrix U = orthonormalize_columns(roots.sqrt * prior_x_dirs);
  for (Index j = 0; j < U.cols(); ++j) H = deflate(H, U.col(j));
  return finish_phd(H, roots.inv_sqrt, K, DrMethod::PhdDeflated);
}

}  // namespace tdr
