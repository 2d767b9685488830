#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tdr/dr_methods.hpp"
#include "tdr/linalg.hpp"

namespace tdr {

/// A direction estimator as seen by the influence diagnostics: it maps a
/// sample to an x-scale basis (p x K) and can refit without one row.
class SubspaceFitter {
 public:
  virtual ~SubspaceFitter() = default;

  virtual std::string name() const = 0;

  virtual Matrix fit(const Vector& y, const Matrix& X) const = 0;

  /// Returns a callable giving the fit with row i removed. The callable may
  /// be invoked concurrently and must stay valid only while y and X live.
  /// The default copies the n - 1 remaining rows and calls fit().
  virtual std::function<Matrix(Index)> leave_one_out(const Vector& y, const Matrix& X) const;
};

/// OLS slope. With `downdate`, leave-one-out fits come from rank-one
/// downdates of the full-sample moments.
class OlsFitter final : public SubspaceFitter {
 public:
  explicit OlsFitter(bool downdate = true) : downdate_(downdate) {}
  std::string name() const override { return "OLS"; }
  Matrix fit(const Vector& y, const Matrix& X) const override;
  std::function<Matrix(Index)> leave_one_out(const Vector& y, const Matrix& X) const override;

 private:
  bool downdate_;
};

class RlmFitter final : public SubspaceFitter {
 public:
  explicit RlmFitter(HuberOptions options = {}) : options_(options) {}
  std::string name() const override { return "RLM"; }
  Matrix fit(const Vector& y, const Matrix& X) const override;

 private:
  HuberOptions options_;
};

/// Leading K PHD directions, optionally deflated by fixed x-scale priors
/// (mapped to each sample's own z-scale before deflation).
class PhdFitter final : public SubspaceFitter {
 public:
  explicit PhdFitter(Index K = 1, Matrix prior_x_dirs = Matrix(), bool downdate = true)
      : K_(K), priors_(std::move(prior_x_dirs)), downdate_(downdate) {}
  std::string name() const override { return priors_.cols() > 0 ? "PHD_deflated" : "PHD"; }
  Matrix fit(const Vector& y, const Matrix& X) const override;
  std::function<Matrix(Index)> leave_one_out(const Vector& y, const Matrix& X) const override;

 private:
  Index K_;
  Matrix priors_;
  bool downdate_;
};

enum class InfluenceMeasure { Ri, Rho };

struct InfluenceReport {
  Vector values;              // NaN at failed indices
  double mean = 0.0;          // over successful indices
  InfluenceMeasure measure = InfluenceMeasure::Rho;
  std::string method;
  std::vector<Index> failed;  // leave-one-out fits that threw
};

struct InfluenceOptions {
  int workers = 1;
};

/// rho_i = (n-1)^2 [1 - r^2(X B, X B_(i))], r^2 the mean squared canonical
/// correlation, both products formed with the full X. Exactly n + 1 fitter
/// evaluations.
InfluenceReport influence_subspace(const Vector& y, const Matrix& X, const SubspaceFitter& fitter,
                                   const InfluenceOptions& options = {});

/// r_i = n^2 [1 / cor^2(X b, X b_(i)) - 1] for the OLS slope.
InfluenceReport influence_ols(const Vector& y, const Matrix& X, bool downdate = true,
                              const InfluenceOptions& options = {});

double mean_influence(const InfluenceReport& report);

/// Mean squared canonical correlation between X B and X C computed from the
/// Gram form (B^T S B, B^T S C, C^T S C) with S the covariance of X.
double avg_sq_canonical_cor_gram(const Matrix& S, const Matrix& B, const Matrix& C);

}  // namespace tdr
