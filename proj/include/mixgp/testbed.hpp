#pragma once

// Mixed-input benchmark functions obtained by slicing continuous test
// functions along one dimension.
//
// Slice positions are equidistant between the bounds of the sliced dimension;
// the position closest to the global optimum is then replaced by the
// optimum's coordinate (ties replace the lower position), so the sliced
// function keeps the continuous function's global optimum.
//
// An upended slice i is mapped to
//
//   y* + z (1 - exp(-z / 2)) + ymax_i / 10,   z = ymax_i - f(i, x)
//
// where ymax_i estimates the maximum of the slice and y* is the global
// optimum value. This flips the slice's correlation with the others while
// every upended value stays above y* + ymax_i / 10.
//
// Slice indices are 1-based.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixgp/gpcore.hpp"

namespace mixgp {

struct ContinuousFunction {
  std::string name;
  int d = 0;
  std::vector<Interval> bounds;
  std::function<double(std::span<const double>)> evaluate;
  std::vector<double> opt_pos;
  double opt_val = 0.0;

  double operator()(std::span<const double> x) const { return evaluate(x); }
};

/// Ackley, Alpine N. 1, Deflected Corrugated Spring and Double-Sum in three
/// dimensions, registered as "ackley", "alpine", "dcs" and "doublesum".
std::vector<ContinuousFunction> standard_functions();
ContinuousFunction standard_function(const std::string& name);

std::vector<double> slice_positions(double lower, double upper, int s);

/// Replaces the position nearest to `opt` by `opt`; on a distance tie the
/// lower position is replaced.
std::vector<double> swap_optimum(std::vector<double> positions, double opt);

/// s positions from the interior quantiles of an (s + 2)-point probability
/// grid, normalized to [0, 1] and rescaled to [lower, upper].
std::vector<double> quantile_positions(const std::function<double(double)>& qdist, int s,
                                       double lower, double upper);

struct SliceMaxOptions {
  int grid = 100;           // points per remaining dimension
  int refine_from = 0;      // grid-local maxima refined, best first; 0 means all
  double tolerance = 1e-9;  // final coordinate step relative to the range
};

/// Maximum of g over the box: dense grid followed by compass-search refinement
/// from every grid-local maximum. The result can underestimate the true maximum.
double estimate_max(const std::function<double(std::span<const double>)>& g,
                    const std::vector<Interval>& bounds, const SliceMaxOptions& options = {});

class SlicedFunction {
 public:
  SlicedFunction(ContinuousFunction base, int s, std::vector<int> upended = {},
                 int sliced_dim = 0, const SliceMaxOptions& max_options = {});

  /// e.g. "ackley" or "ackley-upended-1-3".
  std::string name() const;
  const ContinuousFunction& base() const { return base_; }
  int s() const { return static_cast<int>(positions_.size()); }
  int sliced_dim() const { return sliced_dim_; }
  const std::vector<double>& positions() const { return positions_; }
  const std::vector<int>& upended() const { return upended_; }
  bool is_upended(int slice) const;
  /// Slice whose position equals the optimum's coordinate.
  int optimum_slice() const { return optimum_slice_; }
  /// Bounds of the dimensions that remain continuous.
  std::vector<Interval> rest_bounds() const;
  /// Estimated slice maximum; present for upended slices only.
  std::optional<double> slice_max(int slice) const;

  /// Base function with the sliced dimension pinned to positions[slice].
  double base_value(int slice, std::span<const double> x_rest) const;
  /// Final value, upended where applicable.
  double operator()(int slice, std::span<const double> x_rest) const;

 private:
  ContinuousFunction base_;
  int sliced_dim_;
  std::vector<double> positions_;
  std::vector<int> upended_;
  std::vector<std::optional<double>> slice_max_;
  int optimum_slice_ = 1;

  void check_slice(int slice) const;
};

double eval_sliced(const SlicedFunction& fn, int slice, std::span<const double> x_rest);

/// Maximum of the base function over a slice's continuous domain.
double estimate_slice_max(const SlicedFunction& fn, int slice, const SliceMaxOptions& options = {});

struct CrossCorrEstimate {
  Eigen::MatrixXd matrix;  // NaN marks an undefined (zero-variance) pair
  int grid_resolution = 100;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(matrix.rows()); }
  bool missing(int i, int j) const { return std::isnan(matrix(i, j)); }
};

/// Pearson correlations between slices on a resolution x resolution grid
/// spanning the two remaining dimensions.
CrossCorrEstimate empirical_cross_corr(const SlicedFunction& fn, int resolution = 100);

/// Slices upended in the reference testbed: {1, 3} for s = 4, {1, 2, 4} for s = 6.
std::vector<int> reference_upended_slices(int s);

/// Builds "ackley", "ackley-upended" (reference upend set for s) or an explicit
/// "ackley-upended-1-3" style name.
SlicedFunction make_testbed_function(const std::string& name, int s);

/// The 14 reference functions: four originals and three upended variants for
/// each of s = 4 and s = 6.
std::vector<SlicedFunction> make_reference_testbed();

}  // namespace mixgp
