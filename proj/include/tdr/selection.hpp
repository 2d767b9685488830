#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdr/dr_methods.hpp"
#include "tdr/influence.hpp"
#include "tdr/transforms.hpp"

namespace tdr {

enum class FitterKind { Ols, Rlm, Phd };
enum class Criterion { MinInfluence, MaxEigRatio, MaxEvidence };

std::string_view to_string(FitterKind kind);
std::string_view to_string(Criterion criterion);
FitterKind parse_fitter(std::string_view name);
/// Accepts rho / lambda / tk (and the long names).
Criterion parse_criterion(std::string_view name);

/// MaxEigRatio and MaxEvidence need a PHD spectrum.
bool compatible(FitterKind fitter, Criterion criterion);

/// sum_{i<=K} |lambda_i| / sum_j |lambda_j|; AllZeroSpectrum if every
/// eigenvalue is 0.
double criterion_eig_ratio(const Vector& eigenvalues, Index K);

/// t_0 of the PHD rank test.
double criterion_evidence(const Vector& eigenvalues, Index n, double s2y);

struct TracePoint {
  double param = 0.0;
  double value = 0.0;               // rho-bar, Lambda or t_0
  double leading_eigenvalue = 0.0;  // NaN for OLS/RLM
  bool ok = true;
  std::string warning;
};

struct SearchResult {
  // nullopt means the response was used untransformed (single-point search).
  std::optional<TransformSpec> spec;
  double optimal_param = 0.0;
  Vector direction;    // x-scale, leading direction at the optimum
  Vector z_direction;  // unit z-scale counterpart
  DrFit fit;           // fit at the optimum
  Vector transformed;  // t(y) at the optimum
  std::vector<TracePoint> trace;
  Criterion criterion = Criterion::MinInfluence;
  FitterKind fitter = FitterKind::Phd;
  std::vector<std::string> warnings;

  const TracePoint& optimum() const;
};

struct SearchOptions {
  // Rank-one downdated leave-one-out fits (OLS and PHD) for MinInfluence.
  bool downdate = true;
  int workers = 1;
  HuberOptions huber;
};

/// Influence fitter matching a search configuration.
std::unique_ptr<SubspaceFitter> make_fitter(FitterKind kind, const SearchOptions& options,
                                            const Matrix& prior_x_dirs = Matrix());

/// Grid search for a single direction: transform, fit, score each grid point
/// and keep the extremum (min rho-bar, max Lambda, max t_0). Ties go to the
/// smallest parameter. Grid points that fail are kept in the trace with
/// ok = false and skipped.
SearchResult search_single(const Vector& y, const Matrix& X,
                           const std::optional<TransformSpec>& spec, FitterKind fitter,
                           Criterion criterion, const SearchOptions& options = {});

/// Same search on PHD deflated by fixed x-scale priors (next-direction step).
/// MinInfluence is computed for the new direction only.
SearchResult search_deflated(const Vector& y, const Matrix& X, const Matrix& prior_x_dirs,
                             const std::optional<TransformSpec>& spec, Criterion criterion,
                             const SearchOptions& options = {});

struct StageConfig {
  std::optional<TransformSpec> spec;
  FitterKind fitter = FitterKind::Phd;
  Criterion criterion = Criterion::MinInfluence;
};

/// Two-direction search: stage 1 with any fitter, stage 2 with PHD deflated
/// by the stage-1 direction. stage2.fitter is ignored (always PHD).
std::pair<SearchResult, SearchResult> search_iterative(const Vector& y, const Matrix& X,
                                                       const StageConfig& stage1,
                                                       const StageConfig& stage2,
                                                       const SearchOptions& options = {});

}  // namespace tdr
