#include "mixgp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "csv_util.hpp"
#include "mixgp/design.hpp"
#include "mixgp/errors.hpp"

namespace mixgp {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-temp-then-rename so readers never observe a partial file.
void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string cache_key(const SlicedFunction& fn) { return fn.name() + "_s" + std::to_string(fn.s()); }

CrossCorrEstimate cached_cross_corr(const SlicedFunction& fn, int resolution, const std::string& cache_dir) {
  std::filesystem::path path;
  if (!cache_dir.empty()) {
    path = std::filesystem::path(cache_dir) / ("corr_" + cache_key(fn) + "_r" + std::to_string(resolution) + ".csv");
    if (std::filesystem::exists(path)) {
      const auto rows = csv::lines(read_file(path));
      const auto s = static_cast<Eigen::Index>(rows.size());
      CrossCorrEstimate est;
      est.grid_resolution = resolution;
      est.matrix.resize(s, s);
      for (Eigen::Index i = 0; i < s; ++i) {
        const auto cells = csv::split(rows[static_cast<std::size_t>(i)]);
        if (static_cast<Eigen::Index>(cells.size()) != s) throw FormatError("corrupt cache file " + path.string());
        for (Eigen::Index j = 0; j < s; ++j) est.matrix(i, j) = csv::to_double(cells[static_cast<std::size_t>(j)]);
      }
      return est;
    }
  }
  CrossCorrEstimate est = empirical_cross_corr(fn, resolution);
  if (!path.empty()) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < est.matrix.rows(); ++i) {
      for (Eigen::Index j = 0; j < est.matrix.cols(); ++j) os << (j ? "," : "") << csv::num(est.matrix(i, j));
      os << '\n';
    }
    write_atomically(path, os.str());
  }
  return est;
}

TestSet cached_test_set(const SlicedFunction& fn, int size, std::uint64_t seed, const std::string& cache_dir) {
  std::filesystem::path path;
  if (!cache_dir.empty()) {
    path = std::filesystem::path(cache_dir) /
           ("test_" + cache_key(fn) + "_n" + std::to_string(size) + "_seed" + std::to_string(seed) + ".csv");
    if (std::filesystem::exists(path)) {
      TestSet ts;
      ts.size_per_slice = size;
      for (const auto& row : csv::lines(read_file(path))) {
        const auto cells = csv::split(row);
        if (cells.size() < 3 || cells[0] == "slice") continue;
        MixedPoint p;
        p.level = csv::to_int(cells[0]);
        for (std::size_t k = 1; k + 1 < cells.size(); ++k) p.x.push_back(csv::to_double(cells[k]));
        ts.points.push_back(std::move(p));
        ts.values.push_back(csv::to_double(cells.back()));
      }
      return ts;
    }
  }
  TestSet ts = make_test_set(fn, size, seed);
  if (!path.empty()) {
    std::ostringstream os;
    os << "slice";
    for (std::size_t k = 1; k <= ts.points.front().x.size(); ++k) os << ",x" << k;
    os << ",y\n";
    for (std::size_t i = 0; i < ts.points.size(); ++i) {
      os << ts.points[i].level;
      for (double v : ts.points[i].x) os << ',' << csv::num(v);
      os << ',' << csv::num(ts.values[i]) << '\n';
    }
    write_atomically(path, os.str());
  }
  return ts;
}

std::string opt_num(const std::optional<double>& v) { return v ? csv::num(*v) : std::string(); }

std::optional<double> opt_parse(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return csv::to_double(cell);
}

FitStatus parse_status(const std::string& s) {
  if (s == "ok") return FitStatus::ok;
  if (s == "fallback") return FitStatus::fallback;
  if (s == "failed") return FitStatus::failed;
  throw FormatError("unknown status '" + s + "'");
}

struct Cell {
  const SlicedFunction* fn;
  const CrossCorrEstimate* tau_tilde;
  const TestSet* test;
  int n;
  int rep;
};

std::vector<BenchRecord> run_cell(const ExperimentConfig& cfg, const Cell& cell) {
  const SlicedFunction& fn = *cell.fn;
  const int s = fn.s();
  const auto seed = cfg.base_seed + static_cast<std::uint64_t>(cell.rep);
  const SlicedDesign design = cslhd(cell.n, s, 2, seed);
  const auto bounds = fn.rest_bounds();
  const auto points = scale_to_bounds(design.design, bounds);
  std::vector<double> y;
  y.reserve(points.size());
  for (const auto& p : points) y.push_back(fn(p.level, p.x));
  const TrainingSet train(points, y, bounds, s);

  FitOptions fit_options = cfg.fit;
  fit_options.seed = cfg.fit.seed + static_cast<std::uint64_t>(cell.rep);

  std::vector<BenchRecord> out;
  for (const auto& family : families_for(cfg, s)) {
    BenchRecord rec;
    rec.function = fn.name();
    rec.s = s;
    rec.n = cell.n;
    rec.family = family.label();
    rec.rank = family.rank();
    rec.rep = cell.rep;
    const auto start = std::chrono::steady_clock::now();
    try {
      std::vector<double> pred(cell.test->points.size());
      if (family.spec) {
        const GPFit model = fit(train, family.spec, fit_options);
        rec.status = model.fallback() ? FitStatus::fallback : FitStatus::ok;
        rec.rmse_corr = rmse_corr(extract_tau_hat(model), *cell.tau_tilde);
        const Eigen::VectorXd p = predict(model, cell.test->points);
        std::copy(p.data(), p.data() + p.size(), pred.begin());
      } else {
        const IndividualKriging model = fit_individual(train, fit_options);
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = predict(model, cell.test->points[i]);
      }
      try {
        rec.q2 = q_squared(cell.test->values, pred);
      } catch (const UndefinedCriterion&) {
        rec.q2.reset();
      }
    } catch (const Error&) {
      rec.status = FitStatus::failed;
      rec.rmse_corr.reset();
      rec.q2.reset();
    }
    if (cfg.record_timing) {
      rec.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

double rmse_corr(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& target) {
  if (estimate.rows() != target.rows() || estimate.cols() != target.cols() || estimate.rows() != estimate.cols()) {
    throw ArityError("rmse_corr: matrices differ in size");
  }
  double sum = 0.0;
  for (Eigen::Index i = 1; i < estimate.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double a = estimate(i, j);
      const double b = target(i, j);
      if (std::isnan(a) || std::isnan(b)) continue;
      sum += (a - b) * (a - b);
    }
  }
  return std::sqrt(sum);
}

double rmse_corr(const CorrMatrix& tau_hat, const CrossCorrEstimate& tau_tilde) {
  return rmse_corr(tau_hat.matrix(), tau_tilde.matrix);
}

double q_squared(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw ArityError("q_squared: lengths differ");
  if (y_true.size() < 2) throw ArityError("q_squared needs at least two values");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    sse += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    sst += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (!(sst > 0.0)) throw UndefinedCriterion("Q^2 is undefined for constant true values");
  return 1.0 - sse / sst;
}

TestSet make_test_set(const SlicedFunction& fn, int size, std::uint64_t seed) {
  if (size < 2) throw DomainError("test set needs at least 2 points");
  const auto bounds = fn.rest_bounds();
  const Design base = lhd(size, static_cast<int>(bounds.size()), seed);
  const auto scaled = scale_to_bounds(base, bounds);
  TestSet ts;
  ts.size_per_slice = size;
  for (int slice = 1; slice <= fn.s(); ++slice) {
    for (const auto& p : scaled) {
      ts.points.push_back({p.x, slice});
      ts.values.push_back(fn(slice, p.x));
    }
  }
  return ts;
}

CorrMatrix extract_tau_hat(const GPFit& fit) {
  const auto& cfg = fit.config();
  if (!cfg.family) throw StructuralError("fit has no categorical component");
  return build_corr(*cfg.family, cfg.cat_params);
}

void ExperimentConfig::validate() const {
  if (functions.empty()) throw FormatError("config: 'functions' must not be empty");
  if (s_values.empty() || n_values.empty()) throw FormatError("config: 's' and 'n_per_slice' must not be empty");
  if (families.empty()) throw FormatError("config: 'families' must not be empty");
  if (replications < 1) throw FormatError("config: 'replications' must be >= 1");
  if (test_size < 2) throw FormatError("config: test set size must be >= 2");
  if (resolution < 2) throw FormatError("config: 'resolution' must be >= 2");
  if (fit.starts < 1) throw FormatError("config: fit.starts must be >= 1");
  for (int s : s_values) {
    if (s < 2) throw FormatError("config: every s must be >= 2");
  }
  for (int n : n_values) {
    if (n < 1) throw FormatError("config: every n_per_slice must be >= 1");
  }
  for (const auto& f : families) {
    if (f == "IK" || f == "LRC") continue;
    for (int s : s_values) {
      FamilySpec spec = FamilySpec::parse(f, s);  // throws on unknown names / bad ranks
      (void)spec;
    }
  }
  for (int s : s_values) {
    if (families_for(*this, s).empty()) throw FormatError("config: no family applies to s = " + std::to_string(s));
  }
}

std::vector<BenchFamily> families_for(const ExperimentConfig& cfg, int s) {
  std::vector<BenchFamily> out;
  for (const auto& f : cfg.families) {
    if (f == "IK") {
      out.push_back({});
    } else if (f == "LRC") {
      for (int r = 2; r < s; ++r) out.push_back({FamilySpec::lrc(s, r)});
    } else {
      out.push_back({FamilySpec::parse(f, s)});
    }
  }
  return out;
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  static const std::set<std::string> top = {"functions", "s", "n_per_slice", "families", "replications",
                                            "base_seed", "fit", "test_set", "resolution", "record_timing",
                                            "cache_dir"};
  static const std::set<std::string> fit_keys = {"starts", "seed", "max_evals", "nugget", "corr_nugget",
                                                 "lengthscale_min", "lengthscale_max", "standardize", "threads"};
  static const std::set<std::string> test_keys = {"size", "seed"};
  for (const auto& [k, v] : j.items()) {
    if (!top.count(k)) throw FormatError("config: unknown key '" + k + "'");
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("functions")) cfg.functions = j["functions"].get<std::vector<std::string>>();
    if (j.contains("s")) cfg.s_values = j["s"].get<std::vector<int>>();
    if (j.contains("n_per_slice")) cfg.n_values = j["n_per_slice"].get<std::vector<int>>();
    if (j.contains("families")) cfg.families = j["families"].get<std::vector<std::string>>();
    if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
    if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("resolution")) cfg.resolution = j["resolution"].get<int>();
    if (j.contains("record_timing")) cfg.record_timing = j["record_timing"].get<bool>();
    if (j.contains("cache_dir")) cfg.cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("fit")) {
      const auto& f = j["fit"];
      for (const auto& [k, v] : f.items()) {
        if (!fit_keys.count(k)) throw FormatError("config: unknown key 'fit." + k + "'");
      }
      if (f.contains("starts")) cfg.fit.starts = f["starts"].get<int>();
      if (f.contains("seed")) cfg.fit.seed = f["seed"].get<std::uint64_t>();
      if (f.contains("max_evals")) cfg.fit.max_evals = f["max_evals"].get<int>();
      if (f.contains("nugget")) cfg.fit.nugget = f["nugget"].get<double>();
      if (f.contains("corr_nugget")) cfg.fit.corr_nugget = f["corr_nugget"].get<double>();
      if (f.contains("lengthscale_min")) cfg.fit.lengthscale_box.lower = f["lengthscale_min"].get<double>();
      if (f.contains("lengthscale_max")) cfg.fit.lengthscale_box.upper = f["lengthscale_max"].get<double>();
      if (f.contains("standardize")) cfg.fit.standardize = f["standardize"].get<bool>();
      if (f.contains("threads")) cfg.fit.threads = f["threads"].get<int>();
    }
    if (j.contains("test_set")) {
      const auto& t = j["test_set"];
      for (const auto& [k, v] : t.items()) {
        if (!test_keys.count(k)) throw FormatError("config: unknown key 'test_set." + k + "'");
      }
      if (t.contains("size")) cfg.test_size = t["size"].get<int>();
      if (t.contains("seed")) cfg.test_seed = t["seed"].get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: wrong value type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["functions"] = cfg.functions;
  j["s"] = cfg.s_values;
  j["n_per_slice"] = cfg.n_values;
  j["families"] = cfg.families;
  j["replications"] = cfg.replications;
  j["base_seed"] = cfg.base_seed;
  j["fit"] = {{"starts", cfg.fit.starts},
              {"seed", cfg.fit.seed},
              {"max_evals", cfg.fit.max_evals},
              {"nugget", cfg.fit.nugget},
              {"corr_nugget", cfg.fit.corr_nugget},
              {"lengthscale_min", cfg.fit.lengthscale_box.lower},
              {"lengthscale_max", cfg.fit.lengthscale_box.upper},
              {"standardize", cfg.fit.standardize},
              {"threads", cfg.fit.threads}};
  j["test_set"] = {{"size", cfg.test_size}, {"seed", cfg.test_seed}};
  j["resolution"] = cfg.resolution;
  j["record_timing"] = cfg.record_timing;
  j["cache_dir"] = cfg.cache_dir;
  return j.dump(2);
}

std::string_view status_name(FitStatus status) {
  switch (status) {
    case FitStatus::ok: return "ok";
    case FitStatus::fallback: return "fallback";
    case FitStatus::failed: return "failed";
  }
  return "?";
}

std::vector<BenchRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  if (!cfg.cache_dir.empty()) std::filesystem::create_directories(cfg.cache_dir);

  // Functions, empirical matrices and test sets are shared read-only by all cells.
  std::vector<SlicedFunction> fns;
  for (const auto& name : cfg.functions) {
    for (int s : cfg.s_values) fns.push_back(make_testbed_function(name, s));
  }
  std::vector<CrossCorrEstimate> corr;
  std::vector<TestSet> tests;
  for (const auto& fn : fns) {
    if (options.progress) options.progress("preparing " + fn.name() + " (s=" + std::to_string(fn.s()) + ")");
    corr.push_back(cached_cross_corr(fn, cfg.resolution, cfg.cache_dir));
    tests.push_back(cached_test_set(fn, cfg.test_size, cfg.test_seed, cfg.cache_dir));
  }

  std::vector<Cell> cells;
  for (std::size_t f = 0; f < fns.size(); ++f) {
    for (int n : cfg.n_values) {
      for (int rep = 0; rep < cfg.replications; ++rep) cells.push_back({&fns[f], &corr[f], &tests[f], n, rep});
    }
  }

  std::vector<std::vector<BenchRecord>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      results[i] = run_cell(cfg, cells[i]);
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(cells[i].fn->name() + " s=" + std::to_string(cells[i].fn->s()) +
                         " n=" + std::to_string(cells[i].n) + " rep=" + std::to_string(cells[i].rep) + " done");
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  std::vector<BenchRecord> records;
  for (auto& r : results) {
    for (auto& rec : r) records.push_back(std::move(rec));
  }
  return records;
}

std::vector<BenchRecord> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                        const RunOptions& options) {
  std::filesystem::create_directories(out_dir);
  ExperimentConfig local = cfg;
  if (!local.cache_dir.empty() && std::filesystem::path(local.cache_dir).is_relative()) {
    local.cache_dir = (out_dir / local.cache_dir).string();
  }
  auto records = run_experiment(local, options);

  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  write_atomically(out_dir / "records.csv", records_to_csv(records, std::string(stamp)));
  write_atomically(out_dir / "summary.csv", summary_to_csv(summarize(records)));
  return records;
}

std::string records_to_csv(const std::vector<BenchRecord>& records, const std::optional<std::string>& timestamp) {
  std::ostringstream os;
  if (timestamp) os << "# written " << *timestamp << '\n';
  os << "function,s,n,family,rank,rep,rmse_corr,q2,fit_seconds,status\n";
  for (const auto& r : records) {
    os << r.function << ',' << r.s << ',' << r.n << ',' << r.family << ',' << r.rank << ',' << r.rep << ','
       << opt_num(r.rmse_corr) << ',' << opt_num(r.q2) << ',' << opt_num(r.fit_seconds) << ','
       << status_name(r.status) << '\n';
  }
  return os.str();
}

std::vector<BenchRecord> records_from_csv(std::string_view text) {
  const auto rows = csv::lines(text);
  if (rows.empty()) throw FormatError("records file is empty");
  const std::string expected = "function,s,n,family,rank,rep,rmse_corr,q2,fit_seconds,status";
  if (rows.front() != expected) throw FormatError("records header must be '" + expected + "'");
  std::vector<BenchRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = csv::split(rows[i]);
    if (c.size() != 10) throw FormatError("records row " + std::to_string(i) + " has the wrong column count");
    BenchRecord r;
    r.function = c[0];
    r.s = csv::to_int(c[1]);
    r.n = csv::to_int(c[2]);
    r.family = c[3];
    r.rank = csv::to_int(c[4]);
    r.rep = csv::to_int(c[5]);
    r.rmse_corr = opt_parse(c[6]);
    r.q2 = opt_parse(c[7]);
    r.fit_seconds = opt_parse(c[8]);
    r.status = parse_status(c[9]);
    out.push_back(std::move(r));
  }
  return out;
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw DomainError("box_stats needs at least one value");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  BoxStats b;
  b.median = quantile(0.5);
  b.q25 = quantile(0.25);
  b.q75 = quantile(0.75);
  const double iqr = b.q75 - b.q25;
  b.whisker_low = b.q25;
  b.whisker_high = b.q75;
  for (double v : values) {
    if (v >= b.q25 - 1.5 * iqr) b.whisker_low = std::min(b.whisker_low, v);
    if (v <= b.q75 + 1.5 * iqr) b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records) {
  struct Group {
    const BenchRecord* first;
    std::vector<double> rmse;
    std::vector<double> q2;
    int failures = 0;
  };
  std::vector<Group> groups;
  std::map<std::tuple<std::string, int, int, std::string, int>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.function, r.s, r.n, r.family, r.rank);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({&r, {}, {}, 0});
    }
    Group& g = groups[it->second];
    if (r.status == FitStatus::failed) {
      ++g.failures;
      continue;
    }
    if (r.rmse_corr) g.rmse.push_back(*r.rmse_corr);
    if (r.q2) g.q2.push_back(*r.q2);
  }
  std::vector<SummaryRow> out;
  for (const auto& g : groups) {
    for (const char* metric : {"rmse_corr", "q2"}) {
      const auto& vals = std::string(metric) == "rmse_corr" ? g.rmse : g.q2;
      SummaryRow row{g.first->function, g.first->s, g.first->n, g.first->family, g.first->rank, metric,
                     std::nullopt, g.failures};
      if (!vals.empty()) row.stats = box_stats(vals);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "function,s,n,family,rank,metric,median,q25,q75,failures\n";
  for (const auto& r : rows) {
    os << r.function << ',' << r.s << ',' << r.n << ',' << r.family << ',' << r.rank << ',' << r.metric << ',';
    if (r.stats) {
      os << csv::num(r.stats->median) << ',' << csv::num(r.stats->q25) << ',' << csv::num(r.stats->q75);
    } else {
      os << ",,";
    }
    os << ',' << r.failures << '\n';
  }
  return os.str();
}

}  // namespace mixgp
