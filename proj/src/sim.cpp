#include "tdr/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "tdr/error.hpp"
#include "tdr/parallel.hpp"

namespace tdr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kStreamX = 1;
constexpr std::uint64_t kStreamNoise = 2;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vector padded(std::initializer_list<double> head, Index p) {
  Vector v = Vector::Zero(p);
  Index k = 0;
  for (double x : head) {
    if (k < p) v(k) = x;
    ++k;
  }
  return v;
}

double positive_shift(const Vector& y) {
  const double lo = y.minCoeff();
  return lo > 0.0 ? 0.0 : 1.0 - lo;
}

bool stage_needs_positive(const StageConfig& stage) {
  return stage.spec && needs_positive_response(stage.spec->family);
}

bool method_needs_positive(const MethodConfig& m) {
  return stage_needs_positive(m.stage1) || (m.stage2 && stage_needs_positive(*m.stage2));
}

StageConfig parse_stage(std::string_view token) {
  StageConfig stage;
  std::string_view rest = token;
  if (rest.rfind("bc-", 0) == 0) {
    stage.spec = default_spec(TransformFamily::BoxCox);
    rest.remove_prefix(3);
  } else if (rest.rfind("t1", 0) == 0) {
    stage.spec = default_spec(TransformFamily::MeanAbs);
    rest.remove_prefix(2);
  } else if (rest.rfind("t2", 0) == 0) {
    stage.spec = default_spec(TransformFamily::MeanAbsBoxCox);
    rest.remove_prefix(2);
  }
  std::string_view fitter = rest;
  std::string_view criterion = "rho";
  if (const auto dash = rest.find('-'); dash != std::string_view::npos) {
    fitter = rest.substr(0, dash);
    criterion = rest.substr(dash + 1);
  }
  try {
    stage.fitter = parse_fitter(fitter);
    stage.criterion = parse_criterion(criterion);
  } catch (const Error&) {
    fail(ErrorCode::InvalidMethod, "cannot parse method stage '" + std::string(token) + "'");
  }
  if (!compatible(stage.fitter, stage.criterion)) {
    fail(ErrorCode::InvalidMethod, "criterion '" + std::string(criterion) +
                                       "' needs a PHD fitter in '" + std::string(token) + "'");
  }
  return stage;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::Motivating: return "MOTIVATING";
    case ModelId::M1: return "M1";
    case ModelId::M2: return "M2";
    case ModelId::M3: return "M3";
    case ModelId::M4: return "M4";
  }
  return "?";
}

ModelId parse_model(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "MOTIVATING" || upper == "M0") return ModelId::Motivating;
  if (upper == "M1") return ModelId::M1;
  if (upper == "M2") return ModelId::M2;
  if (upper == "M3") return ModelId::M3;
  if (upper == "M4") return ModelId::M4;
  fail(ErrorCode::InvalidModelId, "unknown model '" + std::string(name) + "'");
}

ModelSpec make_model(ModelId id, Index n, Index p) {
  static constexpr Index kMinP[] = {3, 5, 4, 2, 4};
  const Index min_p = kMinP[static_cast<int>(id)];
  if (p < min_p) {
    fail(ErrorCode::InvalidConfig, std::string(to_string(id)) + " needs p >= " +
                                       std::to_string(min_p));
  }
  if (n < 2) fail(ErrorCode::InvalidConfig, "n must be at least 2");
  ModelSpec spec;
  spec.id = id;
  spec.n = n;
  spec.p = p;
  switch (id) {
    case ModelId::Motivating: spec.true_basis = padded({1, 0, -2}, p); break;
    case ModelId::M1: spec.true_basis = padded({1, 0, 1.5, 0, 0.5}, p); break;
    case ModelId::M2: spec.true_basis = padded({1, 0, -1, 0.5}, p); break;
    case ModelId::M3:
      spec.true_basis.resize(p, 2);
      spec.true_basis << padded({1}, p), padded({0, 1}, p);
      break;
    case ModelId::M4:
      spec.true_basis.resize(p, 2);
      spec.true_basis << padded({1, 2, -3}, p), padded({1, 1, 0, -2}, p);
      break;
  }
  return spec;
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ULL + index);
  const std::uint64_t bits = splitmix64(key);
  const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

Dataset gen_model(const ModelSpec& spec, std::uint64_t seed) {
  const Index n = spec.n;
  const Index p = spec.p;
  Dataset data;
  data.X.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      data.X(i, j) = standard_normal(seed, kStreamX, static_cast<std::uint64_t>(i * p + j));
    }
  }
  Vector eps(n);
  for (Index i = 0; i < n; ++i) {
    eps(i) = spec.noise_scale * standard_normal(seed, kStreamNoise, static_cast<std::uint64_t>(i));
  }
  const Matrix index = data.X * spec.true_basis;
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double v1 = index(i, 0);
    const double e = eps(i);
    switch (spec.id) {
      case ModelId::Motivating: data.y(i) = 2.0 + 1.2 * v1 + 0.5 * e; break;
      case ModelId::M1: data.y(i) = 2.0 * std::exp(1.0 + 1.2 * v1 + 0.5 * e) + 0.3 * e; break;
      case ModelId::M2: data.y(i) = 1.5 * std::sin(0.7 * v1 + 0.25 * e); break;
      case ModelId::M3: {
        const double v2 = index(i, 1);
        data.y(i) = v1 * v1 * v1 / 3.0 - v1 * v2 * v2 + 0.4 * e;
        break;
      }
      case ModelId::M4: {
        const double h = 0.5 * index(i, 1);
        data.y(i) = 5.0 * std::sin(0.5 * v1) + 0.5 * h * h * h + 0.3 * e;
        break;
      }
    }
  }
  data.predictor_names.reserve(static_cast<size_t>(p));
  for (Index j = 0; j < p; ++j) data.predictor_names.push_back("x" + std::to_string(j + 1));
  return data;
}

double metric(const Matrix& true_basis, const Matrix& est_basis, const Matrix& X) {
  return avg_sq_canonical_cor(X * true_basis, X * est_basis);
}

MethodConfig parse_method(std::string_view label) {
  MethodConfig method;
  method.label = std::string(label);
  if (label == "truth") {
    method.truth_oracle = true;
    return method;
  }
  const auto bar = label.find('|');
  if (bar == std::string_view::npos) {
    method.stage1 = parse_stage(label);
    return method;
  }
  method.stage2 = parse_stage(label.substr(0, bar));
  method.stage1 = parse_stage(label.substr(bar + 1));
  if (method.stage2->fitter != FitterKind::Phd) {
    fail(ErrorCode::InvalidMethod, "the conditional stage of '" + method.label + "' must be PHD");
  }
  return method;
}

MethodRun run_method(const MethodConfig& method, const Dataset& data, Index K,
                     const Matrix& true_basis, const SearchOptions& options) {
  MethodRun run;
  if (method.truth_oracle) {
    run.basis = true_basis;
    return run;
  }
  StageConfig stage1 = method.stage1;
  std::optional<StageConfig> stage2 = method.stage2;
  if (method_needs_positive(method)) {
    const double shift = positive_shift(data.y);
    if (stage1.spec) stage1.spec->shift = shift;
    if (stage2 && stage2->spec) stage2->spec->shift = shift;
  }
  const auto param_of = [](const SearchResult& r) {
    return r.spec ? r.optimal_param : kNaN;
  };
  if (stage2) {
    auto [first, second] = search_iterative(data.y, data.X, stage1, *stage2, options);
    run.basis.resize(data.p(), 2);
    run.basis << first.direction, second.direction;
    run.params = {param_of(first), param_of(second)};
    return run;
  }
  SearchResult result =
      search_single(data.y, data.X, stage1.spec, stage1.fitter, stage1.criterion, options);
  run.params = {param_of(result)};
  if (K == 1) {
    run.basis = result.direction;
  } else {
    if (stage1.fitter != FitterKind::Phd) {
      fail(ErrorCode::InvalidMethod, "'" + method.label + "' yields one direction; the model has " +
                                         std::to_string(K));
    }
    run.basis = phd_fit(result.transformed, data.X, K).directions;
  }
  return run;
}

SimReport run_experiment(const ModelSpec& spec, const std::vector<MethodConfig>& methods,
                         Index reps, std::uint64_t base_seed, const ExperimentOptions& options) {
  if (reps < 1) fail(ErrorCode::InvalidConfig, "reps must be at least 1");
  const Index K = spec.true_basis.cols();
  const auto R = static_cast<size_t>(reps);
  const size_t M = methods.size();

  SimReport report;
  report.model = spec.id;
  report.n = spec.n;
  report.p = spec.p;
  report.reps = reps;
  report.base_seed = base_seed;
  report.dataset_hashes.assign(R, 0);
  report.consumed_hashes.assign(R, std::vector<std::uint64_t>(M, 0));
  report.shifts.assign(R, 0.0);

  struct Cell {
    double value = kNaN;
    std::vector<double> params;
    double seconds = 0.0;
    std::string error;
  };
  std::vector<std::vector<Cell>> cells(R, std::vector<Cell>(M));

  SearchOptions search = options.search;
  search.workers = 1;
  parallel_for(reps, options.workers, [&](Index r) {
    const auto ri = static_cast<size_t>(r);
    const Dataset data = gen_model(spec, base_seed + static_cast<std::uint64_t>(r));
    report.dataset_hashes[ri] = dataset_hash(data);
    bool any_positive = false;
    for (size_t m = 0; m < M; ++m) {
      any_positive = any_positive || method_needs_positive(methods[m]);
      report.consumed_hashes[ri][m] = dataset_hash(data);
      Cell& cell = cells[ri][m];
      const auto start = std::chrono::steady_clock::now();
      try {
        const MethodRun run = run_method(methods[m], data, K, spec.true_basis, search);
        cell.value = metric(spec.true_basis, run.basis, data.X);
        cell.params = run.params;
      } catch (const Error& e) {
        cell.error = std::string(to_string(e.code())) + ": " + e.what();
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (any_positive) report.shifts[ri] = positive_shift(data.y);
  });

  for (size_t r = 0; r < R; ++r) {
    if (report.shifts[r] > 0.0) ++report.shifted_replicates;
  }
  for (size_t m = 0; m < M; ++m) {
    MethodSummary s;
    s.label = methods[m].label;
    s.chosen.resize(methods[m].stage2 ? 2 : 1);
    double sum = 0.0;
    Index count = 0;
    for (size_t r = 0; r < R; ++r) {
      const Cell& cell = cells[r][m];
      s.values.push_back(cell.value);
      s.seconds.push_back(cell.seconds);
      s.errors.push_back(cell.error);
      s.chosen_params.push_back(cell.params);
      if (!cell.error.empty()) {
        ++s.failures;
        continue;
      }
      sum += cell.value;
      ++count;
      for (size_t st = 0; st < cell.params.size() && st < s.chosen.size(); ++st) {
        if (!std::isnan(cell.params[st])) ++s.chosen[st][cell.params[st]];
      }
    }
    s.mean = count > 0 ? sum / static_cast<double>(count) : kNaN;
    double ss = 0.0;
    for (size_t r = 0; r < R; ++r) {
      if (cells[r][m].error.empty()) ss += (cells[r][m].value - s.mean) * (cells[r][m].value - s.mean);
    }
    s.sd = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
    report.methods.push_back(std::move(s));
  }
  return report;
}

std::vector<TimingRow> timing_probe(Index p, const std::vector<Criterion>& criteria,
                                    const std::vector<Index>& ns, bool downdate,
                                    std::uint64_t seed, int repeats) {
  std::vector<TimingRow> rows;
  SearchOptions options;
  options.downdate = downdate;
  const TransformSpec spec = default_spec(TransformFamily::MeanAbs);
  for (Index n : ns) {
    const Dataset data = gen_model(make_model(ModelId::M2, n, p), seed);
    for (Criterion c : criteria) {
      std::vector<double> times;
      for (int k = 0; k < std::max(repeats, 1); ++k) {
        const auto start = std::chrono::steady_clock::now();
        const SearchResult r = search_single(data.y, data.X, spec, FitterKind::Phd, c, options);
        times.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        (void)r;
      }
      rows.push_back({c, n, downdate, median_of(times)});
    }
  }
  return rows;
}

}  // namespace tdr
