#pragma once

// Ordinary Kriging for mixed continuous/categorical inputs.
//
// The covariance between w1 = (x1, c1) and w2 = (x2, c2) is
//
//   sigma^2 * matern52(x1 - x2; theta) * P[c1][c2]
//
// where P is a cross-correlation matrix from corrparam. mu and sigma^2 are
// profiled out (GLS mean, ML variance) and the remaining correlation
// parameters psi = (theta, categorical parameters) minimize
//
//   n log sigma2_hat(psi) + log det R(psi).
//
// fit() normalizes continuous inputs to [0, 1] with the declared bounds and
// standardizes responses before optimizing; predict() undoes both.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixgp/corrparam.hpp"
#include "mixgp/optimize.hpp"

namespace mixgp {

inline constexpr double kModelNugget = 1e-8;
inline constexpr double kSigma2Floor = 1e-12;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Continuous coordinates plus a 1-based categorical level.
struct MixedPoint {
  std::vector<double> x;
  int level = 1;
  friend bool operator==(const MixedPoint&, const MixedPoint&) = default;
};

/// Matern 5/2 product kernel. Lengths must match; lengthscales must be positive.
double matern52(std::span<const double> h, std::span<const double> lengthscales);

struct KernelConfig {
  std::vector<double> lengthscales;
  std::optional<FamilySpec> family;  // empty: continuous-only kernel
  std::vector<double> cat_params;
  double nugget = kModelNugget;       // jitter added to the diagonal of R
  double corr_nugget = kCorrNugget;   // regularization of P

  int q() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;

  /// Regularized cross-correlation matrix; 1 x 1 identity for continuous-only.
  CorrMatrix corr() const;
};

/// psi layout: lengthscales first, then the categorical parameters.
std::vector<double> encode_psi(const KernelConfig& config);
KernelConfig decode_psi(std::span<const double> psi, int q, const std::optional<FamilySpec>& family,
                        double nugget = kModelNugget, double corr_nugget = kCorrNugget);

class TrainingSet {
 public:
  /// Rejects n < 2, dimension mismatches, levels outside 1..levels, points
  /// outside bounds and duplicated (x, level) pairs.
  TrainingSet(std::vector<MixedPoint> points, std::vector<double> responses,
              std::vector<Interval> bounds, int levels);

  std::size_t size() const { return points_.size(); }
  int q() const { return static_cast<int>(bounds_.size()); }
  int levels() const { return levels_; }
  const std::vector<MixedPoint>& points() const { return points_; }
  const Eigen::VectorXd& responses() const { return responses_; }
  const std::vector<Interval>& bounds() const { return bounds_; }

  /// Sorted distinct levels that carry at least one point.
  std::vector<int> represented_levels() const;

 private:
  std::vector<MixedPoint> points_;
  Eigen::VectorXd responses_;
  std::vector<Interval> bounds_;
  int levels_;
};

/// matern52(x1 - x2) * P[level1][level2].
double compound_corr(const MixedPoint& w1, const MixedPoint& w2, const KernelConfig& config,
                     const CorrMatrix& p);

struct CorrelationSystem {
  Eigen::MatrixXd r;      // with the model nugget on the diagonal
  Eigen::MatrixXd lower;  // Cholesky factor, r = lower * lower^T
};

/// Assembles R for the training points. Throws IllConditionedError when the
/// Cholesky factorization fails.
CorrelationSystem build_R(const TrainingSet& train, const KernelConfig& config,
                          const CorrMatrix& p);

struct ProfiledLikelihood {
  double mu_hat = 0.0;
  double sigma2_hat = 0.0;
  double objective = 0.0;  // n log sigma2_hat + log det R
  Eigen::MatrixXd chol_lower;
  Eigen::VectorXd alpha;   // R^{-1} (y - mu_hat)
};

ProfiledLikelihood profile_likelihood(const TrainingSet& train, const KernelConfig& config);

/// n log sigma2_hat + log det R at the given kernel parameters.
double concentrated_nll(const KernelConfig& config, const TrainingSet& train);
double concentrated_nll(std::span<const double> psi, const TrainingSet& train,
                        const std::optional<FamilySpec>& family, double nugget = kModelNugget,
                        double corr_nugget = kCorrNugget);

struct FitOptions {
  int starts = 10;
  std::uint64_t seed = 0;
  int max_evals = 0;  // per local search; 0 picks 200 * (number of parameters + 1)
  double nugget = kModelNugget;
  double corr_nugget = kCorrNugget;
  Interval lengthscale_box{1e-2, 10.0};
  bool standardize = true;
  int threads = 1;
};

struct StartRecord {
  double start_value = 0.0;  // objective at the start point (inf if it failed)
  double final_value = 0.0;  // objective after local search (inf if it failed)
  int evaluations = 0;
};

class GPFit {
 public:
  const KernelConfig& config() const { return config_; }
  /// Constant trend and process variance on the response scale.
  double mu_hat() const { return shift_ + scale_ * mu_std_; }
  double sigma2_hat() const { return scale_ * scale_ * sigma2_std_; }
  /// Objective on the normalized/standardized data used for fitting.
  double neg_log_lik() const { return neg_log_lik_; }
  const Eigen::MatrixXd& chol_R() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  const TrainingSet& training() const { return train_; }
  /// Inputs mapped to [0, 1], responses standardized.
  const TrainingSet& scaled_training() const { return scaled_; }
  double response_shift() const { return shift_; }
  double response_scale() const { return scale_; }
  bool standardized() const { return standardized_; }

  /// True when the fit needed a larger model nugget than requested.
  bool fallback() const { return fallback_; }
  const std::vector<StartRecord>& starts() const { return starts_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  GPFit(TrainingSet train, TrainingSet scaled) : train_(std::move(train)), scaled_(std::move(scaled)) {}

  TrainingSet train_;
  TrainingSet scaled_;
  KernelConfig config_;
  double shift_ = 0.0;
  double scale_ = 1.0;
  bool standardized_ = true;
  double mu_std_ = 0.0;
  double sigma2_std_ = 0.0;
  double neg_log_lik_ = 0.0;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  bool fallback_ = false;
  std::vector<StartRecord> starts_;
  std::vector<std::string> warnings_;

  friend GPFit condition(const TrainingSet&, const KernelConfig&, bool);
  friend GPFit fit(const TrainingSet&, const std::optional<FamilySpec>&, const FitOptions&);
};

/// Builds the predictor at fixed kernel parameters (no optimization).
GPFit condition(const TrainingSet& train, const KernelConfig& config, bool standardize = true);

/// Multi-start maximum likelihood. Passing no family, or data that represent a
/// single level, fits the continuous-only kernel.
GPFit fit(const TrainingSet& train, const std::optional<FamilySpec>& family,
          const FitOptions& options = {});

/// EBLUP mu_hat + r0^T R^{-1} (y - mu_hat).
double predict(const GPFit& fit, const MixedPoint& w0);
Eigen::VectorXd predict(const GPFit& fit, std::span<const MixedPoint> queries);

/// One continuous-only model per level.
struct IndividualKriging {
  std::vector<std::optional<GPFit>> models;  // index level - 1
  std::vector<double> fallback_means;        // used where models[level - 1] is empty
  std::vector<std::string> warnings;
};

IndividualKriging fit_individual(const TrainingSet& train, const FitOptions& options = {});
double predict(const IndividualKriging& model, const MixedPoint& w0);

}  // namespace mixgp
