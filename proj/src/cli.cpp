#include "tdr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Core>
#include <CLI11.hpp>
#include <json.hpp>

#include "tdr/dataset.hpp"
#include "tdr/error.hpp"
#include "tdr/selection.hpp"
#include "tdr/sim.hpp"

namespace tdr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    fail(ErrorCode::InvalidConfig, "cannot read " + std::string(what) + " from '" +
                                       std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// JSON number or null for non-finite values.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) {
    fail(ErrorCode::InvalidGrid, "grid must be lo:hi:step, got '" + std::string(text) + "'");
  }
  return make_grid(parse_double(parts[0], "grid lo"), parse_double(parts[1], "grid hi"),
                   parse_double(parts[2], "grid step"));
}

std::vector<Index> parse_index_list(std::string_view text) {
  std::vector<Index> out;
  if (text.empty()) return out;
  for (const auto& part : split(text, ',')) {
    long long v = 0;
    const auto* end = part.data() + part.size();
    const auto res = std::from_chars(part.data(), end, v);
    if (part.empty() || res.ec != std::errc() || res.ptr != end || v < 0) {
      fail(ErrorCode::InvalidConfig, "bad row index '" + part + "'");
    }
    out.push_back(static_cast<Index>(v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

struct Common {
  std::string input;
  std::string response;
  std::vector<std::string> predictors;
  std::string family = "none";
  std::string grid;
  double shift = 0.0;
  bool auto_shift = false;
  std::string fitter = "phd";
  std::string criterion = "rho";
  std::string exclude_rows;
  std::string out = "tdr_out";
  int workers = 1;
  bool no_downdate = false;
};

struct FitArgs {
  int k = 1;
  std::string stage2_family;
  std::string stage2_grid;
  std::string stage2_criterion;
};

struct InfluenceArgs {
  std::optional<double> param;
  std::string measure = "rho";
};

struct SimArgs {
  std::string model = "M2";
  Index n = 500;
  Index p = 10;
  Index reps = 200;
  std::vector<std::string> methods;
  std::uint64_t seed = 1;
};

struct BenchArgs {
  Index p = 10;
  std::vector<Index> ns{100, 200, 300, 400, 500, 1000};
  std::vector<std::string> criteria{"rho", "lambda", "tk"};
  int repeats = 3;
  std::uint64_t seed = 1;
};

int default_workers() {
  if (const char* env = std::getenv("TDR_WORKERS")) {
    int v = 0;
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && v > 0) return v;
  }
  return 1;
}

void add_data_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--input", c.input, "CSV file with a header row")->required();
  cmd->add_option("--response", c.response, "response column")->required();
  cmd->add_option("--predictors", c.predictors, "predictor columns (default: all others)")
      ->delimiter(',');
  cmd->add_option("--family", c.family, "boxcox, t1, t2 or none");
  cmd->add_option("--grid", c.grid, "lo:hi:step (default: the family's grid)");
  cmd->add_option("--shift", c.shift, "constant added to y before transforming");
  cmd->add_flag("--auto-shift", c.auto_shift, "shift by 1 - min(y) when min(y) <= 0");
  cmd->add_option("--fitter", c.fitter, "ols, rlm or phd");
  cmd->add_option("--criterion", c.criterion, "rho, lambda or tk");
  cmd->add_option("--exclude-rows", c.exclude_rows, "0-based data rows left out of the estimation");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--workers", c.workers, "worker threads (default $TDR_WORKERS or 1)");
  cmd->add_flag("--no-downdate", c.no_downdate, "exact refits for leave-one-out");
}

std::optional<TransformSpec> make_spec(const std::string& family, const std::string& grid,
                                       double shift) {
  if (family.empty() || family == "none") {
    if (!grid.empty()) fail(ErrorCode::InvalidConfig, "--grid needs a transform family");
    return std::nullopt;
  }
  TransformSpec spec = default_spec(parse_family(family));
  if (!grid.empty()) spec.grid = parse_grid(grid);
  spec.shift = shift;
  spec.validate();
  return spec;
}

struct Loaded {
  Dataset all;
  Dataset est;
  std::vector<Index> excluded;
  std::vector<bool> is_excluded;
  double shift = 0.0;
};

Loaded load(const Common& c) {
  Loaded L;
  L.all = ingest_csv(c.input, c.response, c.predictors);
  L.excluded = parse_index_list(c.exclude_rows);
  const Index n = L.all.n();
  L.is_excluded.assign(static_cast<size_t>(n), false);
  for (Index i : L.excluded) {
    if (i >= n) {
      fail(ErrorCode::InvalidConfig, "excluded row " + std::to_string(i) + " is out of range (n = " +
                                         std::to_string(n) + ")");
    }
    L.is_excluded[static_cast<size_t>(i)] = true;
  }
  const Index m = n - static_cast<Index>(L.excluded.size());
  L.est.response_name = L.all.response_name;
  L.est.predictor_names = L.all.predictor_names;
  L.est.y.resize(m);
  L.est.X.resize(m, L.all.p());
  Index r = 0;
  for (Index i = 0; i < n; ++i) {
    if (L.is_excluded[static_cast<size_t>(i)]) continue;
    L.est.y(r) = L.all.y(i);
    L.est.X.row(r) = L.all.X.row(i);
    ++r;
  }
  L.shift = c.shift;
  if (c.auto_shift && m > 0 && L.est.y.minCoeff() <= 0.0) L.shift = 1.0 - L.est.y.minCoeff();
  return L;
}

SearchOptions search_options(const Common& c) {
  SearchOptions o;
  o.downdate = !c.no_downdate;
  o.workers = std::max(c.workers, 1);
  return o;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidConfig, "cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json manifest(const std::string& command, const std::vector<std::string>& args,
              std::optional<std::uint64_t> seed, double seconds) {
  json m;
  m["tool"] = "tdr";
  m["version"] = kVersion;
  m["command"] = command;
  m["args"] = args;
  m["seed"] = seed ? json(*seed) : json(nullptr);
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  m["compiler"] = __VERSION__;
  m["wall_seconds"] = seconds;
  return m;
}

json stage_json(const SearchResult& r) {
  json s;
  s["family"] = r.spec ? std::string(to_string(r.spec->family)) : "none";
  s["shift"] = r.spec ? r.spec->shift : 0.0;
  s["fitter"] = std::string(to_string(r.fitter));
  s["criterion"] = std::string(to_string(r.criterion));
  s["optimal_param"] = r.spec ? num(r.optimal_param) : json(nullptr);
  s["criterion_value"] = num(r.optimum().value);
  s["grid_size"] = r.trace.size();
  s["warnings"] = r.warnings;
  return s;
}

std::string trace_csv(const std::vector<const SearchResult*>& stages) {
  std::ostringstream os;
  os << "stage,param,value,leading_eigenvalue,ok,warning\n";
  for (size_t s = 0; s < stages.size(); ++s) {
    for (const auto& pt : stages[s]->trace) {
      std::string w = pt.warning;
      std::replace(w.begin(), w.end(), '"', '\'');
      os << (s + 1) << ',' << format_number(pt.param) << ',' << format_number(pt.value) << ','
         << format_number(pt.leading_eigenvalue) << ',' << (pt.ok ? 1 : 0) << ",\"" << w
         << "\"\n";
    }
  }
  return os.str();
}

// t(y) for every row on the estimation sample's scale; NaN where a row cannot
// be transformed (e.g. an excluded non-positive value under Box-Cox).
Vector transform_all(const SearchResult& r, const Loaded& L) {
  if (!r.spec) return L.all.y;
  Vector out(L.all.n());
  Index e = 0;
  for (Index i = 0; i < L.all.n(); ++i) {
    if (!L.is_excluded[static_cast<size_t>(i)]) {
      out(i) = r.transformed(e++);
      continue;
    }
    try {
      out(i) = apply_transform_relative(*r.spec, r.optimal_param, Vector::Constant(1, L.all.y(i)),
                                        L.est.y)(0);
    } catch (const Error&) {
      out(i) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

int cmd_fit(const Common& c, const FitArgs& f, std::ostream& out,
            std::vector<std::string>& args) {
  const auto start = std::chrono::steady_clock::now();
  if (f.k != 1 && f.k != 2) fail(ErrorCode::InvalidConfig, "--k must be 1 or 2");
  const Loaded L = load(c);
  const SearchOptions opts = search_options(c);
  StageConfig s1{make_spec(c.family, c.grid, L.shift), parse_fitter(c.fitter),
                 parse_criterion(c.criterion)};
  const bool has_stage2 =
      !f.stage2_family.empty() || !f.stage2_grid.empty() || !f.stage2_criterion.empty();
  if (has_stage2 && f.k != 2) fail(ErrorCode::InvalidConfig, "stage-2 options need --k 2");
  const bool iterative = f.k == 2 && (has_stage2 || s1.fitter != FitterKind::Phd);

  std::vector<SearchResult> stages;
  Matrix basis;
  if (iterative) {
    const std::string fam2 = f.stage2_family.empty() ? c.family : f.stage2_family;
    const std::string grid2 =
        f.stage2_grid.empty() && fam2 == c.family ? c.grid : f.stage2_grid;
    Criterion crit2 = f.stage2_criterion.empty() ? s1.criterion : parse_criterion(f.stage2_criterion);
    StageConfig s2{make_spec(fam2, grid2, L.shift), FitterKind::Phd, crit2};
    auto [a, b] = search_iterative(L.est.y, L.est.X, s1, s2, opts);
    basis.resize(L.est.p(), 2);
    basis << a.direction, b.direction;
    stages.push_back(std::move(a));
    stages.push_back(std::move(b));
  } else {
    SearchResult r = search_single(L.est.y, L.est.X, s1.spec, s1.fitter, s1.criterion, opts);
    basis = f.k == 1 ? Matrix(r.direction) : phd_fit(r.transformed, L.est.X, 2).directions;
    stages.push_back(std::move(r));
  }

  const fs::path dir(c.out);
  fs::create_directories(dir);
  const Index p = L.est.p();
  const Index K = basis.cols();

  {
    std::ostringstream os;
    os << "predictor";
    for (Index k = 0; k < K; ++k) os << ",direction" << (k + 1);
    os << '\n';
    for (Index j = 0; j < p; ++j) {
      os << L.est.predictor_names[static_cast<size_t>(j)];
      for (Index k = 0; k < K; ++k) os << ',' << format_number(basis(j, k));
      os << '\n';
    }
    write_text(dir / "directions.csv", os.str());
  }
  std::vector<const SearchResult*> ptrs;
  for (const auto& s : stages) ptrs.push_back(&s);
  write_text(dir / "trace.csv", trace_csv(ptrs));

  {
    std::vector<Vector> ts;
    for (const auto& s : stages) ts.push_back(transform_all(s, L));
    const Matrix proj = L.all.X * basis;
    std::ostringstream os;
    os << "index,y";
    for (size_t s = 0; s < ts.size(); ++s) os << (ts.size() == 1 ? ",t" : ",t" + std::to_string(s + 1));
    for (Index k = 0; k < K; ++k) os << ",proj" << (k + 1);
    os << ",excluded\n";
    for (Index i = 0; i < L.all.n(); ++i) {
      os << i << ',' << format_number(L.all.y(i));
      for (const auto& t : ts) os << ',' << format_number(t(i));
      for (Index k = 0; k < K; ++k) os << ',' << format_number(proj(i, k));
      os << ',' << (L.is_excluded[static_cast<size_t>(i)] ? 1 : 0) << '\n';
    }
    write_text(dir / "essp.csv", os.str());
  }

  json summary;
  summary["command"] = "fit";
  summary["n"] = L.est.n();
  summary["n_total"] = L.all.n();
  summary["p"] = p;
  summary["k"] = K;
  summary["response"] = L.est.response_name;
  summary["predictors"] = L.est.predictor_names;
  summary["excluded_rows"] = L.excluded;
  json st = json::array();
  std::vector<std::string> warnings;
  for (const auto& s : stages) {
    st.push_back(stage_json(s));
    warnings.insert(warnings.end(), s.warnings.begin(), s.warnings.end());
  }
  summary["stages"] = st;
  json dirs = json::array();
  for (Index k = 0; k < K; ++k) {
    json col = json::array();
    for (Index j = 0; j < p; ++j) col.push_back(basis(j, k));
    dirs.push_back(col);
  }
  summary["directions"] = dirs;
  {
    const Vector& t = stages.back().transformed;
    json table = json::array();
    try {
      const DrFit full = phd_fit(t, L.est.X, p);
      for (const auto& row : rank_test_table(full.eigenvalues, L.est.n(), sample_variance(t))) {
        table.push_back({{"k", row.k}, {"statistic", num(row.statistic)}, {"df", row.df},
                         {"p_value", num(row.p_value)}});
      }
    } catch (const Error& e) {
      warnings.push_back(std::string("rank test: ") + e.what());
    }
    summary["rank_test"] = table;
  }
  summary["warnings"] = warnings;
  write_json(dir / "summary.json", summary);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(dir / "manifest.json", manifest("fit", args, std::nullopt, secs));

  for (size_t s = 0; s < stages.size(); ++s) {
    out << "stage " << (s + 1) << ": ";
    if (stages[s].spec) {
      out << to_string(stages[s].spec->family) << " param " << format_number(stages[s].optimal_param);
    } else {
      out << "untransformed";
    }
    out << ", " << to_string(stages[s].criterion) << " = "
        << format_number(stages[s].optimum().value) << '\n';
  }
  out << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_influence(const Common& c, const InfluenceArgs& a, std::ostream& out,
                  std::vector<std::string>& args) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded L = load(c);
  const SearchOptions opts = search_options(c);
  const FitterKind kind = parse_fitter(c.fitter);
  std::optional<TransformSpec> spec = make_spec(c.family, c.grid, L.shift);
  std::optional<double> param;
  Vector t = L.est.y;
  if (spec) {
    if (a.param) {
      param = *a.param;
    } else {
      param = search_single(L.est.y, L.est.X, spec, kind, Criterion::MinInfluence, opts)
                  .optimal_param;
    }
    t = apply_transform(*spec, *param, L.est.y);
  }
  if (L.est.n() < L.est.p() + 2) {
    fail(ErrorCode::DegenerateInput, "influence needs n >= p + 2 (n = " +
                                         std::to_string(L.est.n()) + ", p = " +
                                         std::to_string(L.est.p()) + ")");
  }
  InfluenceOptions io;
  io.workers = opts.workers;
  InfluenceReport report;
  if (a.measure == "ri") {
    if (kind != FitterKind::Ols) fail(ErrorCode::InvalidConfig, "--measure ri needs --fitter ols");
    report = influence_ols(t, L.est.X, opts.downdate, io);
  } else if (a.measure == "rho") {
    report = influence_subspace(t, L.est.X, *make_fitter(kind, opts), io);
  } else {
    fail(ErrorCode::InvalidConfig, "--measure must be rho or ri");
  }

  // Indices refer to rows of the input file.
  std::vector<Index> rows;
  for (Index i = 0; i < L.all.n(); ++i) {
    if (!L.is_excluded[static_cast<size_t>(i)]) rows.push_back(i);
  }
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::ostringstream os;
  os << "index,value\n";
  for (Index r = 0; r < report.values.size(); ++r) {
    os << rows[static_cast<size_t>(r)] << ',' << format_number(report.values(r)) << '\n';
  }
  write_text(dir / "influence.csv", os.str());

  std::vector<Index> order(static_cast<size_t>(report.values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    const double a1 = report.values(i), b1 = report.values(j);
    if (std::isnan(a1)) return false;
    if (std::isnan(b1)) return true;
    return a1 > b1;
  });
  json top = json::array();
  for (size_t k = 0; k < std::min<size_t>(5, order.size()); ++k) {
    const Index r = order[k];
    top.push_back({{"index", rows[static_cast<size_t>(r)]}, {"value", num(report.values(r))}});
  }
  json failed = json::array();
  for (Index r : report.failed) failed.push_back(rows[static_cast<size_t>(r)]);
  json summary;
  summary["command"] = "influence";
  summary["n"] = L.est.n();
  summary["p"] = L.est.p();
  summary["method"] = report.method;
  summary["measure"] = a.measure;
  summary["family"] = spec ? std::string(to_string(spec->family)) : "none";
  summary["param"] = param ? json(*param) : json(nullptr);
  summary["mean"] = num(report.mean);
  summary["top"] = top;
  summary["failed"] = failed;
  summary["excluded_rows"] = L.excluded;
  write_json(dir / "summary.json", summary);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(dir / "manifest.json", manifest("influence", args, std::nullopt, secs));

  out << "mean " << a.measure << " = " << format_number(report.mean) << "; top:";
  for (const auto& e : top) out << ' ' << e["index"].get<Index>();
  out << "\nwrote " << dir.string() << '\n';
  return 0;
}

int cmd_simulate(const SimArgs& s, const Common& c, std::ostream& out,
                 std::vector<std::string>& args) {
  const auto start = std::chrono::steady_clock::now();
  const ModelSpec spec = make_model(parse_model(s.model), s.n, s.p);
  if (s.methods.empty()) fail(ErrorCode::InvalidConfig, "--methods is empty");
  std::vector<MethodConfig> methods;
  for (const auto& m : s.methods) methods.push_back(parse_method(m));
  ExperimentOptions eo;
  eo.workers = std::max(c.workers, 1);
  eo.search.downdate = !c.no_downdate;
  const SimReport rep = run_experiment(spec, methods, s.reps, s.seed, eo);

  const fs::path dir(c.out);
  fs::create_directories(dir);
  {
    std::ostringstream os;
    os << "replicate,seed,method,metric,param1,param2,error,seconds\n";
    for (Index r = 0; r < rep.reps; ++r) {
      const auto ri = static_cast<size_t>(r);
      for (const auto& m : rep.methods) {
        const auto& params = m.chosen_params[ri];
        std::string err = m.errors[ri];
        std::replace(err.begin(), err.end(), '"', '\'');
        os << r << ',' << (s.seed + static_cast<std::uint64_t>(r)) << ",\"" << m.label << "\","
           << format_number(m.values[ri]) << ','
           << (params.size() > 0 ? format_number(params[0]) : "") << ','
           << (params.size() > 1 ? format_number(params[1]) : "") << ",\"" << err << "\","
           << format_number(m.seconds[ri]) << '\n';
      }
    }
    write_text(dir / "sim_long.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "replicate";
    for (const auto& m : rep.methods) os << ",\"" << m.label << '"';
    os << '\n';
    for (Index r = 0; r < rep.reps; ++r) {
      os << r;
      for (const auto& m : rep.methods) os << ',' << format_number(m.values[static_cast<size_t>(r)]);
      os << '\n';
    }
    write_text(dir / "sim_metrics.csv", os.str());
  }
  json j;
  j["command"] = "simulate";
  j["model"] = std::string(to_string(rep.model));
  j["n"] = rep.n;
  j["p"] = rep.p;
  j["reps"] = rep.reps;
  j["base_seed"] = rep.base_seed;
  j["shifted_replicates"] = rep.shifted_replicates;
  json ms = json::array();
  for (const auto& m : rep.methods) {
    json e;
    e["label"] = m.label;
    e["mean"] = num(m.mean);
    e["sd"] = num(m.sd);
    e["failures"] = m.failures;
    json hist = json::array();
    for (const auto& stage : m.chosen) {
      json h = json::array();
      for (const auto& [param, count] : stage) h.push_back({{"param", param}, {"count", count}});
      hist.push_back(h);
    }
    e["chosen"] = hist;
    e["total_seconds"] = std::accumulate(m.seconds.begin(), m.seconds.end(), 0.0);
    ms.push_back(e);
  }
  j["methods"] = ms;
  json hashes = json::array();
  for (auto h : rep.dataset_hashes) hashes.push_back(h);
  j["dataset_hashes"] = hashes;
  json shifts = json::array();
  for (double v : rep.shifts) shifts.push_back(v);
  j["shifts"] = shifts;
  write_json(dir / "sim_report.json", j);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(dir / "manifest.json", manifest("simulate", args, s.seed, secs));

  out << to_string(rep.model) << " n=" << rep.n << " p=" << rep.p << " reps=" << rep.reps << '\n';
  for (const auto& m : rep.methods) {
    out << "  " << m.label << ": " << format_number(m.mean) << " (" << format_number(m.sd) << ")";
    if (m.failures > 0) out << " failures=" << m.failures;
    out << '\n';
  }
  out << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_bench(const BenchArgs& b, const Common& c, std::ostream& out,
              std::vector<std::string>& args) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Criterion> criteria;
  for (const auto& name : b.criteria) criteria.push_back(parse_criterion(name));
  const auto rows = timing_probe(b.p, criteria, b.ns, !c.no_downdate, b.seed, b.repeats);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::ostringstream os;
  os << "criterion,n,downdate,seconds\n";
  for (const auto& r : rows) {
    os << to_string(r.criterion) << ',' << r.n << ',' << (r.downdate ? 1 : 0) << ','
       << format_number(r.seconds) << '\n';
  }
  write_text(dir / "bench.csv", os.str());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(dir / "manifest.json", manifest("bench", args, b.seed, secs));
  out << os.str();
  return 0;
}

void report_error(const Error& e, const std::string& out_dir, std::ostream& err) {
  json j;
  j["error"] = std::string(to_string(e.code()));
  j["message"] = e.what();
  err << j.dump() << '\n';
  std::error_code ec;
  if (!out_dir.empty() && fs::is_directory(out_dir, ec)) {
    std::ofstream f(fs::path(out_dir) / "error.json");
    f << j.dump(2) << '\n';
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transformation-based dimension reduction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common c;
  c.workers = default_workers();
  FitArgs fa;
  InfluenceArgs ia;
  SimArgs sa;
  BenchArgs ba;
  double param = 0.0;

  auto* fit = app.add_subcommand("fit", "grid search for transformed DR directions");
  add_data_options(fit, c);
  fit->add_option("--k", fa.k, "number of directions (1 or 2)");
  fit->add_option("--stage2-family", fa.stage2_family, "transform for the second direction");
  fit->add_option("--stage2-grid", fa.stage2_grid, "lo:hi:step for the second direction");
  fit->add_option("--stage2-criterion", fa.stage2_criterion, "criterion for the second direction");

  auto* inf = app.add_subcommand("influence", "per-observation influence values");
  add_data_options(inf, c);
  auto* param_opt = inf->add_option("--param", param, "transform parameter (default: rho-optimal)");
  inf->add_option("--measure", ia.measure, "rho, or ri for the OLS measure");

  auto* sim = app.add_subcommand("simulate", "replicated simulation study");
  sim->add_option("--model", sa.model, "MOTIVATING, M1, M2, M3 or M4");
  sim->add_option("--n", sa.n, "sample size");
  sim->add_option("--p", sa.p, "number of predictors");
  sim->add_option("--reps", sa.reps, "replicates");
  sim->add_option("--methods", sa.methods, "comma-separated method labels")
      ->delimiter(',')
      ->required();
  sim->add_option("--seed", sa.seed, "base seed; replicate r uses seed + r");
  sim->add_option("--out", c.out, "output directory");
  sim->add_option("--workers", c.workers, "worker threads");
  sim->add_flag("--no-downdate", c.no_downdate, "exact refits for leave-one-out");

  auto* bench = app.add_subcommand("bench", "criterion timing on Model 2");
  bench->add_option("--p", ba.p, "number of predictors");
  bench->add_option("--ns", ba.ns, "sample sizes")->delimiter(',');
  bench->add_option("--criteria", ba.criteria, "criteria to time")->delimiter(',');
  bench->add_option("--repeats", ba.repeats, "runs per cell (median reported)");
  bench->add_option("--seed", ba.seed, "data seed");
  bench->add_option("--out", c.out, "output directory");
  bench->add_flag("--no-downdate", c.no_downdate, "exact refits for leave-one-out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (*fit) return cmd_fit(c, fa, out, args);
    if (*inf) {
      if (param_opt->count() > 0) ia.param = param;
      return cmd_influence(c, ia, out, args);
    }
    if (*sim) return cmd_simulate(sa, c, out, args);
    if (*bench) return cmd_bench(ba, c, out, args);
  } catch (const Error& e) {
    report_error(e, c.out, err);
    return 1;
  } catch (const std::exception& e) {
    report_error(Error(ErrorCode::InvalidConfig, e.what()), c.out, err);
    return 1;
  }
  return 2;
}

}  // namespace tdr::cli
