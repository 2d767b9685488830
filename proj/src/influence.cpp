#include "tdr/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tdr/error.hpp"
#include "tdr/parallel.hpp"

namespace tdr {

namespace {

Vector drop_row(const Vector& y, Index i) {
  Vector out(y.size() - 1);
  out.head(i) = y.head(i);
  out.tail(y.size() - 1 - i) = y.tail(y.size() - 1 - i);
  return out;
}

Matrix drop_row(const Matrix& X, Index i) {
  Matrix out(X.rows() - 1, X.cols());
  out.topRows(i) = X.topRows(i);
  out.bottomRows(X.rows() - 1 - i) = X.bottomRows(X.rows() - 1 - i);
  return out;
}

// Full-sample sums about the full-sample means, from which every
// leave-one-out mean/covariance/hessian follows by a rank-one downdate.
struct CenteredSums {
  Index n = 0;
  Matrix xc;     // n x p, x_i - xbar
  Vector yc;     // y_i - ybar
  Matrix sxx;    // sum xc xc^T
  Vector sxy;    // sum yc xc
  Matrix syxx;   // sum yc xc xc^T (only when requested)

  CenteredSums(const Vector& y, const Matrix& X, bool with_hessian) : n(X.rows()) {
    xc = X.rowwise() - X.colwise().mean();
    yc = y.array() - y.mean();
    sxx = xc.transpose() * xc;
    sxy = xc.transpose() * yc;
    if (with_hessian) syxx = xc.transpose() * (xc.array().colwise() * yc.array()).matrix();
  }

  struct Downdated {
    Vector dx;       // shift of the mean
    Matrix cov;      // divisor m - 1
    Vector cov_xy;   // divisor m - 1
    Matrix sxx;      // sum over j != i of xc xc^T
    Vector sxy;
  };

  Downdated without(Index i) const {
    const double m = static_cast<double>(n - 1);
    const Vector xi = xc.row(i).transpose();
    const double yi = yc(i);
    Downdated d;
    d.dx = -xi / m;
    const double dy = -yi / m;
    d.sxx = sxx - xi * xi.transpose();
    d.sxy = sxy - yi * xi;
    d.cov = (d.sxx - m * d.dx * d.dx.transpose()) / (m - 1.0);
    d.cov_xy = (d.sxy - m * d.dx * dy) / (m - 1.0);
    return d;
  }

  PhdMoments phd_without(Index i, const Vector& x_mean) const {
    const double m = static_cast<double>(n - 1);
    const Downdated d = without(i);
    const Vector xi = xc.row(i).transpose();
    const double yi = yc(i);
    const double dy = -yi / m;
    const Matrix s = syxx - yi * xi * xi.transpose();
    Matrix w = s - d.sxy * d.dx.transpose() - d.dx * d.sxy.transpose() - dy * d.sxx +
               2.0 * m * dy * d.dx * d.dx.transpose();
    PhdMoments out;
    out.n = n - 1;
    out.mean = x_mean + d.dx;
    out.cov = d.cov;
    out.weighted = w / m;
    return out;
  }
};

double avg_sq_cancor_k1(const Matrix& S, const Vector& b, const Vector& c) {
  const double bb = b.dot(S * b);
  const double cc = c.dot(S * c);
  if (!(bb > 0.0) || !(cc > 0.0)) return 0.0;
  const double bc = b.dot(S * c);
  return std::clamp(bc * bc / (bb * cc), 0.0, 1.0);
}

}  // namespace

std::function<Matrix(Index)> SubspaceFitter::leave_one_out(const Vector& y,
                                                           const Matrix& X) const {
  return [this, &y, &X](Index i) { return fit(drop_row(y, i), drop_row(X, i)); };
}

Matrix OlsFitter::fit(const Vector& y, const Matrix& X) const {
  return ols_slope(y, X).directions;
}

std::function<Matrix(Index)> OlsFitter::leave_one_out(const Vector& y, const Matrix& X) const {
  if (!downdate_) return SubspaceFitter::leave_one_out(y, X);
  if (X.rows() - 1 <= X.cols()) {
    fail(ErrorCode::DegenerateInput, "leave-one-out OLS needs n > p + 1");
  }
  auto sums = std::make_shared<const CenteredSums>(y, X, false);
  return [sums](Index i) -> Matrix {
    const auto d = sums->without(i);
    // Same positive-definiteness gate as the full refit.
    (void)sym_sqrt(d.cov);
    return d.cov.ldlt().solve(d.cov_xy);
  };
}

Matrix RlmFitter::fit(const Vector& y, const Matrix& X) const {
  return rlm_slope(y, X, options_).directions;
}

Matrix PhdFitter::fit(const Vector& y, const Matrix& X) const {
  if (X.rows() <= X.cols()) fail(ErrorCode::DegenerateInput, "PHD needs n > p");
  return phd_from_moments(phd_moments(y, X), K_, priors_).directions;
}

std::function<Matrix(Index)> PhdFitter::leave_one_out(const Vector& y, const Matrix& X) const {
  if (!downdate_) return SubspaceFitter::leave_one_out(y, X);
  if (X.rows() - 1 <= X.cols()) {
    fail(ErrorCode::DegenerateInput, "leave-one-out PHD needs n > p + 1");
  }
  auto sums = std::make_shared<const CenteredSums>(y, X, true);
  Vector mean = X.colwise().mean().transpose();
  return [this, sums, mean](Index i) -> Matrix {
    return phd_from_moments(sums->phd_without(i, mean), K_, priors_).directions;
  };
}

double avg_sq_canonical_cor_gram(const Matrix& S, const Matrix& B, const Matrix& C) {
  if (B.cols() == 1 && C.cols() == 1) return avg_sq_cancor_k1(S, B.col(0), C.col(0));
  const Matrix SB = S * B;
  const Matrix SC = S * C;
  Eigen::LLT<Matrix> lb(B.transpose() * SB);
  Eigen::LLT<Matrix> lc(C.transpose() * SC);
  if (lb.info() != Eigen::Success || lc.info() != Eigen::Success) {
    fail(ErrorCode::RankDeficient, "direction basis is rank deficient");
  }
  // L_b^{-1} (B^T S C) L_c^{-T}
  Matrix cross = B.transpose() * SC;
  cross = lb.matrixL().solve(cross);
  cross = lc.matrixL().solve(cross.transpose()).transpose();
  Eigen::JacobiSVD<Matrix> svd(cross);
  const Index r = std::min(B.cols(), C.cols());
  const Vector s = svd.singularValues().head(r);
  return s.cwiseProduct(s).cwiseMin(1.0).cwiseMax(0.0).mean();
}

InfluenceReport influence_subspace(const Vector& y, const Matrix& X, const SubspaceFitter& fitter,
                                   const InfluenceOptions& options) {
  const Index n = X.rows();
  if (n < X.cols() + 2) {
    fail(ErrorCode::DegenerateInput, "influence needs n >= p + 2 (n = " + std::to_string(n) +
                                         ", p = " + std::to_string(X.cols()) + ")");
  }
  const Matrix full = fitter.fit(y, X);
  const Matrix S = sample_mean_cov(X).cov;
  const auto loo = fitter.leave_one_out(y, X);
  const double scale = static_cast<double>(n - 1) * static_cast<double>(n - 1);

  InfluenceReport report;
  report.measure = InfluenceMeasure::Rho;
  report.method = fitter.name();
  report.values = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> ok(static_cast<size_t>(n), 0);
  parallel_for(n, options.workers, [&](Index i) {
    try {
      const Matrix Bi = loo(i);
      const double r2 = avg_sq_canonical_cor_gram(S, full, Bi);
      report.values(i) = std::max(0.0, scale * (1.0 - r2));
      ok[static_cast<size_t>(i)] = 1;
    } catch (const Error&) {
    }
  });
  double sum = 0.0;
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    if (ok[static_cast<size_t>(i)]) {
      sum += report.values(i);
      ++count;
    } else {
      report.failed.push_back(i);
    }
  }
  if (count == 0) fail(ErrorCode::DegenerateInput, "every leave-one-out fit failed");
  report.mean = sum / static_cast<double>(count);
  return report;
}

InfluenceReport influence_ols(const Vector& y, const Matrix& X, bool downdate,
                              const InfluenceOptions& options) {
  const Index n = X.rows();
  if (n < X.cols() + 2) {
    fail(ErrorCode::DegenerateInput, "influence needs n >= p + 2");
  }
  const OlsFitter fitter(downdate);
  const Vector b = fitter.fit(y, X).col(0);
  const Matrix S = sample_mean_cov(X).cov;
  const auto loo = fitter.leave_one_out(y, X);
  const double scale = static_cast<double>(n) * static_cast<double>(n);

  InfluenceReport report;
  report.measure = InfluenceMeasure::Ri;
  report.method = fitter.name();
  report.values = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> ok(static_cast<size_t>(n), 0);
  parallel_for(n, options.workers, [&](Index i) {
    try {
      const double r2 = avg_sq_cancor_k1(S, b, loo(i).col(0));
      if (r2 > 0.0) {
        report.values(i) = std::max(0.0, scale * (1.0 / r2 - 1.0));
        ok[static_cast<size_t>(i)] = 1;
      }
    } catch (const Error&) {
    }
  });
  double sum = 0.0;
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    if (ok[static_cast<size_t>(i)]) {
      sum += report.values(i);
      ++count;
    } else {
      report.failed.push_back(i);
    }
  }
  if (count == 0) fail(ErrorCode::DegenerateInput, "every leave-one-out fit failed");
  report.mean = sum / static_cast<double>(count);
  return report;
}

double mean_influence(const InfluenceReport& report) {
  if (report.values.size() == 0) fail(ErrorCode::DegenerateInput, "empty influence report");
  double sum = 0.0;
  Index count = 0;
  for (Index i = 0; i < report.values.size(); ++i) {
    if (std::isnan(report.values(i))) continue;
    sum += report.values(i);
    ++count;
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace tdr
