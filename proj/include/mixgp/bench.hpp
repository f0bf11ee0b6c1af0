#pragma once

// Simulation study driver: fit every correlation family to sliced test
// functions sampled on clustered sliced LHDs, then score the estimated
// cross-correlation matrix (root sum of squared lower-triangle errors) and
// the response-surface prediction (Q^2).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixgp/corrparam.hpp"
#include "mixgp/gpcore.hpp"
#include "mixgp/testbed.hpp"

namespace mixgp {

/// sqrt(sum_{i > j} (a_ij - b_ij)^2). Pairs where either matrix holds NaN are skipped.
double rmse_corr(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& target);
double rmse_corr(const CorrMatrix& tau_hat, const CrossCorrEstimate& tau_tilde);

/// 1 - sum (y - yhat)^2 / sum (y - mean(y))^2. Throws UndefinedCriterion when
/// y_true is constant.
double q_squared(std::span<const double> y_true, std::span<const double> y_pred);

struct TestSet {
  std::vector<MixedPoint> points;  // slice-major, problem coordinates
  std::vector<double> values;
  int size_per_slice = 0;
};

/// One LHD of `size` points over the continuous dimensions, repeated for every slice.
TestSet make_test_set(const SlicedFunction& fn, int size, std::uint64_t seed);

/// Cross-correlation matrix of a fitted compound model (not regularized).
/// Throws StructuralError for a continuous-only fit.
CorrMatrix extract_tau_hat(const GPFit& fit);

/// Bench family label: a correlation family or "IK" (individual kriging baseline).
struct BenchFamily {
  std::optional<FamilySpec> spec;  // empty for IK
  std::string label() const { return spec ? spec->label() : "IK"; }
  int rank() const { return spec ? spec->rank : 0; }
};

struct ExperimentConfig {
  std::vector<std::string> functions{"ackley", "alpine", "dcs", "doublesum",
                                     "ackley-upended", "alpine-upended", "dcs-upended"};
  std::vector<int> s_values{4, 6};
  std::vector<int> n_values{4, 8};
  /// "EC", "MC", "UC", "IK", "LRC" (every rank 2..s-1) or an explicit "LRC3".
  std::vector<std::string> families{"EC", "MC", "LRC", "UC"};
  int replications = 100;
  std::uint64_t base_seed = 1;
  FitOptions fit;
  int test_size = 1000;
  std::uint64_t test_seed = 2021;
  int resolution = 100;
  bool record_timing = false;
  std::string cache_dir;  // empty: in-memory caching only

  /// Throws FormatError / DomainError on inconsistent settings.
  void validate() const;
};

/// Families applicable for a given s, in configuration order.
std::vector<BenchFamily> families_for(const ExperimentConfig& cfg, int s);

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

enum class FitStatus { ok, fallback, failed };
std::string_view status_name(FitStatus status);

struct BenchRecord {
  std::string function;
  int s = 0;
  int n = 0;
  std::string family;
  int rank = 0;
  int rep = 0;
  std::optional<double> rmse_corr;
  std::optional<double> q2;
  std::optional<double> fit_seconds;
  FitStatus status = FitStatus::ok;
};

struct RunOptions {
  int jobs = 1;
  std::function<void(const std::string&)> progress;
};

/// Runs the study; records are ordered by (function, s, n, rep, family)
/// regardless of the job count.
std::vector<BenchRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Runs the study and writes records.csv and summary.csv into `out_dir`.
std::vector<BenchRecord> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                        const RunOptions& options = {});

/// Columns function,s,n,family,rank,rep,rmse_corr,q2,fit_seconds,status.
/// A leading '#' comment line carries the timestamp when `timestamp` is set.
std::string records_to_csv(const std::vector<BenchRecord>& records,
                           const std::optional<std::string>& timestamp = std::nullopt);
std::vector<BenchRecord> records_from_csv(std::string_view text);

struct BoxStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double whisker_low = 0.0;   // most extreme value within 1.5 IQR below q25
  double whisker_high = 0.0;  // most extreme value within 1.5 IQR above q75
};

/// Linearly interpolated quantiles (the usual boxplot convention). Empty input throws.
BoxStats box_stats(std::vector<double> values);

struct SummaryRow {
  std::string function;
  int s = 0;
  int n = 0;
  std::string family;
  int rank = 0;
  std::string metric;  // "rmse_corr" or "q2"
  std::optional<BoxStats> stats;
  int failures = 0;
};

std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records);
/// Columns function,s,n,family,rank,metric,median,q25,q75,failures.
std::string summary_to_csv(const std::vector<SummaryRow>& rows);

}  // namespace mixgp
