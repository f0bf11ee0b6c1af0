#include "mixgp/gpcore.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "mixgp/errors.hpp"

namespace mixgp {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-10;

double matern52_1d(double h, double theta) {
  const double a = kSqrt5 * std::abs(h) / theta;
  return std::exp(-a) * (a * a / 3.0 + a + 1.0);
}

std::vector<Interval> unit_box(int q) { return std::vector<Interval>(static_cast<std::size_t>(q)); }

std::vector<double> normalize(const std::vector<double>& x, const std::vector<Interval>& bounds) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - bounds[i].lower) / (bounds[i].upper - bounds[i].lower);
  }
  return out;
}

struct ResponseScaling {
  double shift = 0.0;
  double scale = 1.0;
};

ResponseScaling response_scaling(const Eigen::VectorXd& y, bool standardize) {
  if (!standardize) return {};
  const double mean = y.mean();
  const double ss = (y.array() - mean).square().sum();
  const double sd = y.size() > 1 ? std::sqrt(ss / static_cast<double>(y.size() - 1)) : 0.0;
  return {mean, sd > 0.0 ? sd : 1.0};
}

TrainingSet scale_training(const TrainingSet& train, const ResponseScaling& rs) {
  std::vector<MixedPoint> pts;
  pts.reserve(train.size());
  for (const auto& p : train.points()) pts.push_back({normalize(p.x, train.bounds()), p.level});
  std::vector<double> y(train.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = (train.responses()[static_cast<Eigen::Index>(i)] - rs.shift) / rs.scale;
  }
  return TrainingSet(std::move(pts), std::move(y), unit_box(train.q()), train.levels());
}

// Maps the optimizer's unit cube onto the parameter box: log scale for
// lengthscales, linear for the categorical parameters.
struct ParamMap {
  int q = 0;
  Interval ls_box;
  ParamBounds cat;

  std::vector<double> to_psi(std::span<const double> u) const {
    std::vector<double> psi(u.size());
    const double lo = std::log(ls_box.lower);
    const double hi = std::log(ls_box.upper);
    for (int i = 0; i < q; ++i) psi[i] = std::exp(lo + u[i] * (hi - lo));
    for (std::size_t k = 0; k < cat.lower.size(); ++k) {
      const std::size_t i = static_cast<std::size_t>(q) + k;
      psi[i] = cat.lower[k] + u[i] * (cat.upper[k] - cat.lower[k]);
    }
    return psi;
  }
};

}  // namespace

double matern52(std::span<const double> h, std::span<const double> lengthscales) {
  if (h.size() != lengthscales.size()) throw ArityError("matern52: dimension mismatch");
  double value = 1.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(lengthscales[i] > 0.0)) throw DomainError("matern52: lengthscales must be positive");
    value *= matern52_1d(h[i], lengthscales[i]);
  }
  return value;
}

void KernelConfig::validate() const {
  if (lengthscales.empty()) throw ArityError("kernel needs at least one continuous dimension");
  for (double t : lengthscales) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("lengthscales must be positive");
  }
  if (!(nugget >= 0.0)) throw DomainError("model nugget must be >= 0");
  if (family) {
    if (static_cast<int>(cat_params.size()) != param_count(*family)) {
      throw ArityError("categorical parameter count does not match " + family->label());
    }
  } else if (!cat_params.empty()) {
    throw ArityError("continuous-only kernel takes no categorical parameters");
  }
}

CorrMatrix KernelConfig::corr() const {
  if (!family) return CorrMatrix::from_matrix(Eigen::MatrixXd::Identity(1, 1));
  return regularize(build_corr(*family, cat_params), corr_nugget);
}

std::vector<double> encode_psi(const KernelConfig& config) {
  std::vector<double> psi = config.lengthscales;
  psi.insert(psi.end(), config.cat_params.begin(), config.cat_params.end());
  return psi;
}

KernelConfig decode_psi(std::span<const double> psi, int q, const std::optional<FamilySpec>& family,
                        double nugget, double corr_nugget) {
  const int ncat = family ? param_count(*family) : 0;
  if (static_cast<int>(psi.size()) != q + ncat) throw ArityError("psi has the wrong length");
  KernelConfig cfg;
  cfg.lengthscales.assign(psi.begin(), psi.begin() + q);
  cfg.family = family;
  cfg.cat_params.assign(psi.begin() + q, psi.end());
  cfg.nugget = nugget;
  cfg.corr_nugget = corr_nugget;
  cfg.validate();
  return cfg;
}

TrainingSet::TrainingSet(std::vector<MixedPoint> points, std::vector<double> responses,
                         std::vector<Interval> bounds, int levels)
    : points_(std::move(points)), bounds_(std::move(bounds)), levels_(levels) {
  if (points_.size() < 2) throw DomainError("training set needs at least 2 points");
  if (responses.size() != points_.size()) throw ArityError("responses and points differ in length");
  if (levels_ < 1) throw DomainError("level count must be >= 1");
  if (bounds_.empty()) throw ArityError("training set needs at least one continuous dimension");
  for (const auto& b : bounds_) {
    if (!(b.lower < b.upper) || !std::isfinite(b.lower) || !std::isfinite(b.upper)) {
      throw DomainError("bounds must be finite with lower < upper");
    }
  }
  for (const auto& p : points_) {
    if (p.x.size() != bounds_.size()) throw ArityError("point dimension differs from bounds");
    if (p.level < 1 || p.level > levels_) {
      throw IndexError("level " + std::to_string(p.level) + " outside 1.." + std::to_string(levels_));
    }
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      if (!(p.x[i] >= bounds_[i].lower && p.x[i] <= bounds_[i].upper)) {
        throw DomainError("training point outside the declared bounds");
      }
    }
  }
  for (double y : responses) {
    if (!std::isfinite(y)) throw DomainError("non-finite response");
  }
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (points_[a].level != points_[b].level) return points_[a].level < points_[b].level;
    return points_[a].x < points_[b].x;
  });
  for (std::size_t k = 1; k < idx.size(); ++k) {
    if (points_[idx[k]] == points_[idx[k - 1]]) {
      throw DomainError("duplicated training point (index " + std::to_string(idx[k]) + ")");
    }
  }
  responses_ = Eigen::Map<const Eigen::VectorXd>(responses.data(),
                                                 static_cast<Eigen::Index>(responses.size()));
}

std::vector<int> TrainingSet::represented_levels() const {
  std::set<int> seen;
  for (const auto& p : points_) seen.insert(p.level);
  return {seen.begin(), seen.end()};
}

double compound_corr(const MixedPoint& w1, const MixedPoint& w2, const KernelConfig& config,
                     const CorrMatrix& p) {
  const std::size_t q = config.lengthscales.size();
  if (w1.x.size() != q || w2.x.size() != q) throw ArityError("compound_corr: dimension mismatch");
  double value = 1.0;
  for (std::size_t i = 0; i < q; ++i) value *= matern52_1d(w1.x[i] - w2.x[i], config.lengthscales[i]);
  if (config.family) value *= p(w1.level - 1, w2.level - 1);
  return value;
}

CorrelationSystem build_R(const TrainingSet& train, const KernelConfig& config, const CorrMatrix& p) {
  if (train.q() != config.q()) throw ArityError("kernel and training set differ in dimension");
  if (config.family && p.size() != train.levels()) {
    throw ArityError("cross-correlation matrix size differs from the level count");
  }
  const auto n = static_cast<Eigen::Index>(train.size());
  const auto& pts = train.points();
  CorrelationSystem sys;
  sys.r.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.r(i, i) = 1.0 + config.nugget;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = compound_corr(pts[i], pts[j], config, p);
      sys.r(i, j) = v;
      sys.r(j, i) = v;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sys.r);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("Cholesky of the correlation matrix failed; increase the model nugget");
  }
  sys.lower = llt.matrixL();
  return sys;
}

ProfiledLikelihood profile_likelihood(const TrainingSet& train, const KernelConfig& config) {
  config.validate();
  const CorrMatrix p = config.corr();
  CorrelationSystem sys = build_R(train, config, p);
  const auto n = static_cast<Eigen::Index>(train.size());
  const auto lower = sys.lower.triangularView<Eigen::Lower>();
  const auto upper = sys.lower.transpose().triangularView<Eigen::Upper>();

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd& y = train.responses();
  Eigen::VectorXd rinv_one = lower.solve(ones);
  upper.solveInPlace(rinv_one);

  ProfiledLikelihood out;
  out.mu_hat = rinv_one.dot(y) / rinv_one.sum();
  Eigen::VectorXd alpha = lower.solve(y - out.mu_hat * ones);
  const double quad = alpha.squaredNorm();
  upper.solveInPlace(alpha);

  out.sigma2_hat = std::max(quad / static_cast<double>(n), kSigma2Floor);
  const double log_det = 2.0 * sys.lower.diagonal().array().log().sum();
  out.objective = static_cast<double>(n) * std::log(out.sigma2_hat) + log_det;
  out.chol_lower = std::move(sys.lower);
  out.alpha = std::move(alpha);
  return out;
}

double concentrated_nll(const KernelConfig& config, const TrainingSet& train) {
  return profile_likelihood(train, config).objective;
}

double concentrated_nll(std::span<const double> psi, const TrainingSet& train,
                        const std::optional<FamilySpec>& family, double nugget, double corr_nugget) {
  return concentrated_nll(decode_psi(psi, train.q(), family, nugget, corr_nugget), train);
}

GPFit condition(const TrainingSet& train, const KernelConfig& config, bool standardize) {
  const ResponseScaling rs = response_scaling(train.responses(), standardize);
  GPFit out(train, scale_training(train, rs));
  out.config_ = config;
  out.shift_ = rs.shift;
  out.scale_ = rs.scale;
  out.standardized_ = standardize;
  ProfiledLikelihood lik = profile_likelihood(out.scaled_, config);
  out.mu_std_ = lik.mu_hat;
  out.sigma2_std_ = lik.sigma2_hat;
  out.neg_log_lik_ = lik.objective;
  out.chol_ = std::move(lik.chol_lower);
  out.alpha_ = std::move(lik.alpha);
  return out;
}

GPFit fit(const TrainingSet& train, const std::optional<FamilySpec>& family_in,
          const FitOptions& options) {
  if (options.starts < 1) throw DomainError("fit needs at least one start");
  if (!(options.lengthscale_box.lower > 0.0 &&
        options.lengthscale_box.lower < options.lengthscale_box.upper)) {
    throw DomainError("lengthscale box must satisfy 0 < lower < upper");
  }
  std::vector<std::string> warnings;
  std::optional<FamilySpec> family = family_in;
  if (family) {
    family->validate();
    if (family->s != train.levels()) {
      throw ArityError("family level count differs from the training set's level count");
    }
    if (train.represented_levels().size() < 2) {
      warnings.push_back("only one level is represented; fitting the continuous kernel alone");
      family.reset();
    }
  }

  const ResponseScaling rs = response_scaling(train.responses(), options.standardize);
  const TrainingSet scaled = scale_training(train, rs);
  const int q = train.q();
  ParamMap map{q, options.lengthscale_box, family ? param_bounds(*family) : ParamBounds{}};
  const int dim = q + static_cast<int>(map.cat.lower.size());

  NelderMeadOptions nm;
  nm.max_evals = options.max_evals > 0 ? options.max_evals : 200 * (dim + 1);
  const std::vector<double> lo(static_cast<std::size_t>(dim), 0.0);
  const std::vector<double> hi(static_cast<std::size_t>(dim), 1.0);
  const auto starts = maximin_starts(options.starts, dim, options.seed);

  auto run_all = [&](double nugget) {
    const Objective objective = [&](std::span<const double> u) {
      try {
        return concentrated_nll(map.to_psi(u), scaled, family, nugget, options.corr_nugget);
      } catch (const IllConditionedError&) {
        return kInf;
      } catch (const NumericalRankError&) {
        return kInf;
      }
    };
    auto one = [&](std::size_t k) {
      OptimResult r = nelder_mead_box(objective, starts[k], lo, hi, nm);
      const double start_value = objective(starts[k]);
      // A second pass from the optimum refreshes a collapsed simplex.
      if (std::isfinite(r.value)) {
        OptimResult again = nelder_mead_box(objective, r.x, lo, hi, nm);
        again.evaluations += r.evaluations;
        if (again.value < r.value) r = std::move(again);
        else r.evaluations = again.evaluations;
      }
      return std::pair{start_value, r};
    };
    std::vector<std::pair<double, OptimResult>> results(starts.size());
    if (options.threads > 1) {
      const auto width = static_cast<std::size_t>(options.threads);
      for (std::size_t first = 0; first < starts.size(); first += width) {
        const std::size_t last = std::min(first + width, starts.size());
        std::vector<std::future<std::pair<double, OptimResult>>> batch;
        for (std::size_t k = first; k < last; ++k) batch.push_back(std::async(std::launch::async, one, k));
        for (std::size_t k = first; k < last; ++k) results[k] = batch[k - first].get();
      }
    } else {
      for (std::size_t k = 0; k < starts.size(); ++k) results[k] = one(k);
    }
    return results;
  };

  double nugget = options.nugget;
  auto results = run_all(nugget);
  auto all_failed = [&] {
    return std::none_of(results.begin(), results.end(),
                        [](const auto& r) { return std::isfinite(r.second.value); });
  };
  bool fallback = false;
  if (all_failed()) {
    nugget = std::max(options.nugget * 100.0, 1e-6);
    warnings.push_back("all starts failed; retrying with model nugget " + std::to_string(nugget));
    results = run_all(nugget);
    fallback = true;
  }
  if (all_failed()) {
    std::vector<std::string> diag;
    for (std::size_t k = 0; k < results.size(); ++k) {
      std::ostringstream os;
      os << "start " << k << ": start objective " << results[k].first << ", "
         << results[k].second.evaluations << " evaluations, no finite objective";
      diag.push_back(os.str());
    }
    throw FitFailure("every optimizer start failed", std::move(diag));
  }

  double best_value = kInf;
  for (const auto& r : results) best_value = std::min(best_value, r.second.value);
  std::size_t best = 0;
  while (!(results[best].second.value <= best_value + kTieTolerance)) ++best;

  KernelConfig cfg = decode_psi(map.to_psi(results[best].second.x), q, family, nugget,
                                options.corr_nugget);
  GPFit out = condition(train, cfg, options.standardize);
  out.fallback_ = fallback;
  out.warnings_ = std::move(warnings);
  for (const auto& [start_value, r] : results) {
    out.starts_.push_back({start_value, r.value, r.evaluations});
  }
  return out;
}

double predict(const GPFit& fit, const MixedPoint& w0) {
  return predict(fit, std::span<const MixedPoint>(&w0, 1))[0];
}

Eigen::VectorXd predict(const GPFit& fit, std::span<const MixedPoint> queries) {
  const auto& cfg = fit.config();
  const CorrMatrix p = cfg.corr();
  const auto& pts = fit.scaled_training().points();
  const auto& bounds = fit.training().bounds();
  const auto n = static_cast<Eigen::Index>(pts.size());
  const double mu_std = (fit.mu_hat() - fit.response_shift()) / fit.response_scale();

  Eigen::VectorXd out(static_cast<Eigen::Index>(queries.size()));
  Eigen::VectorXd r0(n);
  for (std::size_t k = 0; k < queries.size(); ++k) {
    const auto& w = queries[k];
    if (w.x.size() != bounds.size()) throw ArityError("query dimension differs from the model");
    if (cfg.family && (w.level < 1 || w.level > cfg.family->s)) {
      throw IndexError("query level outside 1.." + std::to_string(cfg.family->s));
    }
    const MixedPoint wn{normalize(w.x, bounds), w.level};
    for (Eigen::Index i = 0; i < n; ++i) r0[i] = compound_corr(wn, pts[i], cfg, p);
    const double y_std = mu_std + r0.dot(fit.alpha());
    out[static_cast<Eigen::Index>(k)] = fit.response_shift() + fit.response_scale() * y_std;
  }
  return out;
}

IndividualKriging fit_individual(const TrainingSet& train, const FitOptions& options) {
  IndividualKriging out;
  const int s = train.levels();
  out.models.resize(static_cast<std::size_t>(s));
  out.fallback_means.assign(static_cast<std::size_t>(s), train.responses().mean());

  for (int level = 1; level <= s; ++level) {
    std::vector<MixedPoint> pts;
    std::vector<double> ys;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.points()[i].level != level) continue;
      pts.push_back({train.points()[i].x, 1});
      ys.push_back(train.responses()[static_cast<Eigen::Index>(i)]);
    }
    const auto slot = static_cast<std::size_t>(level - 1);
    if (!ys.empty()) {
      out.fallback_means[slot] = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    }
    if (ys.size() < 2) {
      out.warnings.push_back("level " + std::to_string(level) + " has " + std::to_string(ys.size()) +
                             " point(s); predicting its mean");
      continue;
    }
    TrainingSet slice(std::move(pts), std::move(ys), train.bounds(), 1);
    out.models[slot] = fit(slice, std::nullopt, options);
  }
  return out;
}

double predict(const IndividualKriging& model, const MixedPoint& w0) {
  if (w0.level < 1 || w0.level > static_cast<int>(model.models.size())) {
    throw IndexError("query level outside the model's levels");
  }
  const auto slot = static_cast<std::size_t>(w0.level - 1);
  if (!model.models[slot]) return model.fallback_means[slot];
  return predict(*model.models[slot], MixedPoint{w0.x, 1});
}

}  // namespace mixgp
