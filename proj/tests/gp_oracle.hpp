#pragma once

// Dense reference implementation of the kriging formulas: explicit inverse,
// determinant from LU, no Cholesky anywhere.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mixgp/corrparam.hpp"
#include "mixgp/gpcore.hpp"

namespace oracle {

inline double matern_1d(double h, double theta) {
  const double d = std::abs(h) / theta;
  return std::exp(-std::sqrt(5.0) * d) * (5.0 * d * d / 3.0 + std::sqrt(5.0) * d + 1.0);
}

struct NaiveGp {
  Eigen::MatrixXd r;
  Eigen::MatrixXd r_inv;
  double mu = 0.0;
  double sigma2 = 0.0;
  double objective = 0.0;
  std::vector<mixgp::MixedPoint> points;
  Eigen::VectorXd y;
  mixgp::KernelConfig config;
  Eigen::MatrixXd p;
};

inline Eigen::MatrixXd regularized_p(const mixgp::KernelConfig& cfg) {
  if (!cfg.family) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd p = mixgp::build_corr(*cfg.family, cfg.cat_params).matrix();
  const auto s = p.rows();
  p = (p + cfg.corr_nugget * Eigen::MatrixXd::Identity(s, s)) / (1.0 + cfg.corr_nugget);
  p.diagonal().setOnes();
  return p;
}

inline double kernel(const NaiveGp& g, const mixgp::MixedPoint& a, const mixgp::MixedPoint& b) {
  double v = 1.0;
  for (std::size_t k = 0; k < a.x.size(); ++k) v *= matern_1d(a.x[k] - b.x[k], g.config.lengthscales[k]);
  if (g.config.family) v *= g.p(a.level - 1, b.level - 1);
  return v;
}

/// Points must already be in the coordinates the kernel sees.
inline NaiveGp build(const std::vector<mixgp::MixedPoint>& pts, const Eigen::VectorXd& y,
                     const mixgp::KernelConfig& cfg) {
  NaiveGp g;
  g.points = pts;
  g.y = y;
  g.config = cfg;
  g.p = regularized_p(cfg);
  const auto n = static_cast<Eigen::Index>(pts.size());
  g.r.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g.r(i, j) = i == j ? 1.0 + cfg.nugget : kernel(g, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
    }
  }
  g.r_inv = g.r.fullPivLu().inverse();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
  g.mu = (one.transpose() * g.r_inv * y)(0) / (one.transpose() * g.r_inv * one)(0);
  const Eigen::VectorXd e = y - g.mu * one;
  g.sigma2 = std::max((e.transpose() * g.r_inv * e)(0) / static_cast<double>(n), 1e-12);
  g.objective = static_cast<double>(n) * std::log(g.sigma2) + std::log(g.r.fullPivLu().determinant());
  return g;
}

inline double predict(const NaiveGp& g, const mixgp::MixedPoint& w0) {
  const auto n = static_cast<Eigen::Index>(g.points.size());
  Eigen::VectorXd r0(n);
  for (Eigen::Index i = 0; i < n; ++i) r0(i) = kernel(g, w0, g.points[static_cast<std::size_t>(i)]);
  return g.mu + (r0.transpose() * g.r_inv * (g.y - g.mu * Eigen::VectorXd::Ones(n)))(0);
}

/// Maps problem coordinates onto [0, 1] with the given bounds.
inline mixgp::MixedPoint normalized(const mixgp::MixedPoint& p, const std::vector<mixgp::Interval>& bounds) {
  mixgp::MixedPoint out = p;
  for (std::size_t k = 0; k < p.x.size(); ++k) {
    out.x[k] = (p.x[k] - bounds[k].lower) / (bounds[k].upper - bounds[k].lower);
  }
  return out;
}

}  // namespace oracle
