#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdr/dataset.hpp"
#include "tdr/selection.hpp"

namespace tdr {

enum class ModelId { Motivating, M1, M2, M3, M4 };

std::string_view to_string(ModelId id);
ModelId parse_model(std::string_view name);

// Simulation models, X ~ N_p(0, I), e ~ N(0, 1):
//   Motivating  y = 2 + 1.2 b'x + 0.5 e                      b = (1, 0, -2, 0, ...)
//   M1          y = 2 exp(1 + 1.2 b'x + 0.5 e) + 0.3 e       b = (1, 0, 1.5, 0, 0.5, 0, ...)
//   M2          y = 1.5 sin(0.7 b'x + 0.25 e)                b = (1, 0, -1, 0.5, 0, ...)
//   M3          y = (b1'x)^3 / 3 - (b1'x)(b2'x)^2 + 0.4 e    b1 = e1, b2 = e2
//   M4          y = 5 sin(0.5 b1'x) + 0.5 (0.5 b2'x)^3 + 0.3 e
//                                                            b1 = (1, 2, -3, 0, ...)
//                                                            b2 = (1, 1, 0, -2, 0, ...)
struct ModelSpec {
  ModelId id = ModelId::M1;
  Index n = 200;
  Index p = 10;
  Matrix true_basis;         // p x K
  double noise_scale = 1.0;  // multiplies e; 0 gives the noiseless model
};

ModelSpec make_model(ModelId id, Index n, Index p);

/// Counter-based N(0,1) draw: splitmix64 of (seed, stream, index) mapped to
/// a uniform in (0, 1) and pushed through the inverse normal CDF. Identical
/// on every platform and independent of evaluation order.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

Dataset gen_model(const ModelSpec& spec, std::uint64_t seed);

/// avg_sq_canonical_cor(X B_true, X B_est); cor^2 for K = 1.
double metric(const Matrix& true_basis, const Matrix& est_basis, const Matrix& X);

/// One simulation method. Stage 2, when present, is PHD deflated by the
/// stage-1 direction. Without a stage 2 the method returns its top K
/// directions (K from the model), which requires PHD when K > 1.
struct MethodConfig {
  std::string label;
  StageConfig stage1;
  std::optional<StageConfig> stage2;
  bool truth_oracle = false;  // returns the true basis (test hook)
};

/// Parses labels such as ols, rlm, phd, bc-ols, bc-rlm, t1phd-rho,
/// t2phd-lambda, t1phd-tk, and "stage2|stage1" composites like
/// t2phd-tk|bc-ols or phd|ols. "truth" selects the oracle. Transformed
/// searches use the default grids; the criterion defaults to rho.
MethodConfig parse_method(std::string_view label);

struct MethodSummary {
  std::string label;
  std::vector<double> values;  // per replicate, NaN when the method failed
  double mean = 0.0;
  double sd = 0.0;
  Index failures = 0;
  // stage index (0, 1) -> chosen parameter -> count
  std::vector<std::map<double, Index>> chosen;
  std::vector<std::vector<double>> chosen_params;  // per replicate, per stage
  std::vector<double> seconds;                     // per replicate
  std::vector<std::string> errors;                 // per replicate, empty if ok
};

struct SimReport {
  ModelId model = ModelId::M1;
  Index n = 0;
  Index p = 0;
  Index reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<MethodSummary> methods;
  std::vector<std::uint64_t> dataset_hashes;  // per replicate
  // per replicate, per method: hash of the data the method consumed
  std::vector<std::vector<std::uint64_t>> consumed_hashes;
  std::vector<double> shifts;  // per replicate shift applied for positive families (0 if none)
  Index shifted_replicates = 0;
};

struct ExperimentOptions {
  int workers = 1;
  SearchOptions search;
};

/// Replicate r uses seed base_seed + r; every method sees the same dataset.
/// Aggregation is ordered by replicate so the payload does not depend on
/// the worker count (wall times aside).
SimReport run_experiment(const ModelSpec& spec, const std::vector<MethodConfig>& methods,
                         Index reps, std::uint64_t base_seed,
                         const ExperimentOptions& options = {});

/// Runs one method on one dataset; returns the p x K estimated basis and the
/// chosen parameters per stage.
struct MethodRun {
  Matrix basis;
  std::vector<double> params;
};
MethodRun run_method(const MethodConfig& method, const Dataset& data, Index K,
                     const Matrix& true_basis, const SearchOptions& options);

struct TimingRow {
  Criterion criterion = Criterion::MinInfluence;
  Index n = 0;
  bool downdate = false;
  double seconds = 0.0;  // median of `repeats` runs
};

/// Wall time of one T1-PHD search_single trial on Model 2 (p as given) per
/// criterion and sample size, median of `repeats`.
std::vector<TimingRow> timing_probe(Index p, const std::vector<Criterion>& criteria,
                                    const std::vector<Index>& ns, bool downdate,
                                    std::uint64_t seed = 1, int repeats = 3);

}  // namespace tdr
