#include "tdr/selection.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tdr/error.hpp"
#include "tdr/parallel.hpp"

namespace tdr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct GridEval {
  TracePoint point;
  DrFit fit;
  Vector transformed;
};

bool minimizes(Criterion c) { return c == Criterion::MinInfluence; }

GridEval evaluate_point(const Vector& y, const Matrix& X, const std::optional<TransformSpec>& spec,
                        double param, FitterKind kind, Criterion criterion,
                        const Matrix& prior_x, const Matrix& prior_z,
                        const SearchOptions& options) {
  GridEval out;
  out.point.param = param;
  out.point.leading_eigenvalue = kNaN;
  try {
    out.transformed = spec ? apply_transform(*spec, param, y) : y;
    const Vector& t = out.transformed;
    switch (kind) {
      case FitterKind::Ols: out.fit = ols_slope(t, X); break;
      case FitterKind::Rlm: out.fit = rlm_slope(t, X, options.huber); break;
      case FitterKind::Phd:
        out.fit = prior_z.cols() > 0 ? phd_fit_deflated(t, X, prior_z, 1) : phd_fit(t, X, 1);
        out.point.leading_eigenvalue = out.fit.eigenvalues(0);
        break;
    }
    switch (criterion) {
      case Criterion::MinInfluence: {
        const auto fitter = make_fitter(kind, options, prior_x);
        InfluenceOptions inf;
        inf.workers = 1;
        const InfluenceReport report = influence_subspace(t, X, *fitter, inf);
        out.point.value = report.mean;
        if (!report.failed.empty()) {
          out.point.warning = std::to_string(report.failed.size()) +
                              " leave-one-out fit(s) failed and were excluded";
        }
        break;
      }
      case Criterion::MaxEigRatio:
        out.point.value = criterion_eig_ratio(out.fit.eigenvalues, 1);
        break;
      case Criterion::MaxEvidence:
        out.point.value = criterion_evidence(out.fit.eigenvalues, X.rows(), sample_variance(t));
        break;
    }
    if (!std::isfinite(out.point.value)) {
      fail(ErrorCode::NonFinite, "criterion value is not finite");
    }
    out.point.ok = true;
  } catch (const Error& e) {
    out.point.ok = false;
    out.point.value = kNaN;
    out.point.warning = std::string(to_string(e.code())) + ": " + e.what();
  }
  return out;
}

SearchResult run_search(const Vector& y, const Matrix& X, const std::optional<TransformSpec>& spec,
                        FitterKind kind, Criterion criterion, const Matrix& prior_x,
                        const SearchOptions& options) {
  if (!compatible(kind, criterion)) {
    fail(ErrorCode::IncompatibleCriterion, std::string(to_string(criterion)) +
                                               " needs PHD eigenvalues; fitter is " +
                                               std::string(to_string(kind)));
  }
  if (y.size() != X.rows()) fail(ErrorCode::DegenerateInput, "response/predictor size mismatch");
  if (spec) spec->validate();

  Matrix prior_z;
  if (prior_x.cols() > 0) {
    if (kind != FitterKind::Phd) {
      fail(ErrorCode::InvalidConfig, "deflated search requires the PHD fitter");
    }
    prior_z = standardize(X).sqrt_cov * prior_x;
  }

  const std::vector<double> grid = spec ? spec->grid : std::vector<double>{0.0};
  const auto count = static_cast<Index>(grid.size());
  std::vector<GridEval> evals(grid.size());
  parallel_for(count, options.workers, [&](Index k) {
    const auto idx = static_cast<size_t>(k);
    evals[idx] = evaluate_point(y, X, spec, grid[idx], kind, criterion, prior_x, prior_z, options);
  });

  SearchResult result;
  result.spec = spec;
  result.criterion = criterion;
  result.fitter = kind;
  std::optional<size_t> best;
  for (size_t k = 0; k < evals.size(); ++k) {
    const TracePoint& pt = evals[k].point;
    result.trace.push_back(pt);
    if (!pt.warning.empty()) {
      result.warnings.push_back("param " + std::to_string(pt.param) + ": " + pt.warning);
    }
    if (!pt.ok) continue;
    if (!best) {
      best = k;
      continue;
    }
    const double current = evals[*best].point.value;
    const bool better = minimizes(criterion) ? pt.value < current : pt.value > current;
    if (better) best = k;
  }
  if (!best) {
    std::string msg = "every grid point failed";
    if (!result.warnings.empty()) msg += " (first: " + result.warnings.front() + ")";
    fail(ErrorCode::AllParamsFailed, msg);
  }

  GridEval& chosen = evals[*best];
  result.optimal_param = chosen.point.param;
  result.direction = chosen.fit.directions.col(0);
  result.z_direction = chosen.fit.z_directions.col(0);
  result.transformed = std::move(chosen.transformed);
  result.fit = std::move(chosen.fit);
  if (result.fit.zero_slope) result.warnings.push_back("optimal fit has a zero slope");
  return result;
}

}  // namespace

std::string_view to_string(FitterKind kind) {
  switch (kind) {
    case FitterKind::Ols: return "ols";
    case FitterKind::Rlm: return "rlm";
    case FitterKind::Phd: return "phd";
  }
  return "?";
}

std::string_view to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::MinInfluence: return "rho";
    case Criterion::MaxEigRatio: return "lambda";
    case Criterion::MaxEvidence: return "tk";
  }
  return "?";
}

FitterKind parse_fitter(std::string_view name) {
  if (name == "ols") return FitterKind::Ols;
  if (name == "rlm") return FitterKind::Rlm;
  if (name == "phd") return FitterKind::Phd;
  fail(ErrorCode::InvalidConfig, "unknown fitter '" + std::string(name) + "'");
}

Criterion parse_criterion(std::string_view name) {
  if (name == "rho" || name == "min-influence") return Criterion::MinInfluence;
  if (name == "lambda" || name == "max-eig-ratio") return Criterion::MaxEigRatio;
  if (name == "tk" || name == "max-evidence") return Criterion::MaxEvidence;
  fail(ErrorCode::InvalidConfig, "unknown criterion '" + std::string(name) + "'");
}

bool compatible(FitterKind fitter, Criterion criterion) {
  return criterion == Criterion::MinInfluence || fitter == FitterKind::Phd;
}

double criterion_eig_ratio(const Vector& eigenvalues, Index K) {
  if (K < 1 || K > eigenvalues.size()) {
    fail(ErrorCode::InvalidConfig, "eigenvalue ratio needs 1 <= K <= p");
  }
  const double total = eigenvalues.cwiseAbs().sum();
  if (!(total > 0.0)) fail(ErrorCode::AllZeroSpectrum, "PHD spectrum is identically zero");
  return eigenvalues.head(K).cwiseAbs().sum() / total;
}

double criterion_evidence(const Vector& eigenvalues, Index n, double s2y) {
  return rank_test(eigenvalues, 0, n, s2y).statistic;
}

const TracePoint& SearchResult::optimum() const {
  for (const auto& pt : trace) {
    if (pt.ok && pt.param == optimal_param) return pt;
  }
  fail(ErrorCode::AllParamsFailed, "search result has no optimum");
}

std::unique_ptr<SubspaceFitter> make_fitter(FitterKind kind, const SearchOptions& options,
                                            const Matrix& prior_x_dirs) {
  switch (kind) {
    case FitterKind::Ols: return std::make_unique<OlsFitter>(options.downdate);
    case FitterKind::Rlm: return std::make_unique<RlmFitter>(options.huber);
    case FitterKind::Phd: return std::make_unique<PhdFitter>(1, prior_x_dirs, options.downdate);
  }
  fail(ErrorCode::InvalidConfig, "unknown fitter");
}

SearchResult search_single(const Vector& y, const Matrix& X,
                           const std::optional<TransformSpec>& spec, FitterKind fitter,
                           Criterion criterion, const SearchOptions& options) {
  return run_search(y, X, spec, fitter, criterion, Matrix(), options);
}

SearchResult search_deflated(const Vector& y, const Matrix& X, const Matrix& prior_x_dirs,
                             const std::optional<TransformSpec>& spec, Criterion criterion,
                             const SearchOptions& options) {
  if (prior_x_dirs.cols() == 0 || prior_x_dirs.rows() != X.cols()) {
    fail(ErrorCode::InvalidConfig, "deflated search needs p x m prior directions, m >= 1");
  }
  return run_search(y, X, spec, FitterKind::Phd, criterion, prior_x_dirs, options);
}

std::pair<SearchResult, SearchResult> search_iterative(const Vector& y, const Matrix& X,
                                                       const StageConfig& stage1,
                                                       const StageConfig& stage2,
                                                       const SearchOptions& options) {
  SearchResult first = search_single(y, X, stage1.spec, stage1.fitter, stage1.criterion, options);
  if (first.fit.zero_slope) {
    fail(ErrorCode::DegenerateInput, "stage-1 direction is zero; nothing to deflate");
  }
  SearchResult second = search_deflated(y, X, first.direction, stage2.spec, stage2.criterion,
                                        options);
  return {std::move(first), std::move(second)};
}

}  // namespace tdr
