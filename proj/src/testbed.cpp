#include "mixgp/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "mixgp/errors.hpp"

namespace mixgp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ackley(std::span<const double> x) {
  const double d = static_cast<double>(x.size());
  double sq = 0.0;
  double cs = 0.0;
  for (double v : x) {
    sq += v * v;
    cs += std::cos(kTwoPi * v);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 + std::numbers::e;
}

double alpine1(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += std::abs(v * std::sin(v) + 0.1 * v);
  return sum;
}

// Deflected Corrugated Spring with alpha = 5, K = 5.
double dcs(std::span<const double> x) {
  double sq = 0.0;
  for (double v : x) sq += (v - 5.0) * (v - 5.0);
  return 0.1 * sq - std::cos(5.0 * std::sqrt(sq));
}

double double_sum(std::span<const double> x) {
  double partial = 0.0;
  double sum = 0.0;
  for (double v : x) {
    partial += v;
    sum += partial * partial;
  }
  return sum;
}

ContinuousFunction make(std::string name, double lo, double hi, double (*f)(std::span<const double>),
                        double opt_coord, double opt_val) {
  constexpr int d = 3;
  return {std::move(name), d, std::vector<Interval>(d, Interval{lo, hi}), f,
          std::vector<double>(d, opt_coord), opt_val};
}

// Compass search maximizing g from x; steps halve until below `min_step`.
void refine_max(const std::function<double(std::span<const double>)>& g, const std::vector<Interval>& bounds,
                std::vector<double>& x, double& fx, std::vector<double> step, double rel_tol) {
  const std::size_t d = x.size();
  std::vector<double> trial(x);
  for (int iter = 0; iter < 100000; ++iter) {
    bool improved = false;
    for (std::size_t k = 0; k < d; ++k) {
      for (double sign : {1.0, -1.0}) {
        trial = x;
        trial[k] = std::clamp(x[k] + sign * step[k], bounds[k].lower, bounds[k].upper);
        const double ft = g(trial);
        if (ft > fx) {
          x = trial;
          fx = ft;
          improved = true;
          break;
        }
      }
    }
    if (improved) continue;
    bool done = true;
    for (std::size_t k = 0; k < d; ++k) {
      step[k] *= 0.5;
      if (step[k] > rel_tol * (bounds[k].upper - bounds[k].lower)) done = false;
    }
    if (done) break;
  }
}

}  // namespace

std::vector<ContinuousFunction> standard_functions() {
  return {
      make("ackley", -32.77, 32.77, ackley, 0.0, 0.0),
      make("alpine", -10.0, 10.0, alpine1, 0.0, 0.0),
      make("dcs", 0.0, 10.0, dcs, 5.0, -1.0),
      make("doublesum", -65.54, 65.54, double_sum, 0.0, 0.0),
  };
}

ContinuousFunction standard_function(const std::string& name) {
  for (auto& f : standard_functions()) {
    if (f.name == name) return f;
  }
  throw LookupError("unknown test function '" + name + "'");
}

std::vector<double> slice_positions(double lower, double upper, int s) {
  if (s < 2) throw DomainError("slicing needs s >= 2");
  if (!(lower < upper)) throw DomainError("slicing needs lower < upper");
  std::vector<double> pos(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    pos[static_cast<std::size_t>(i)] = lower + i * (upper - lower) / (s - 1);
  }
  pos.back() = upper;
  return pos;
}

std::vector<double> swap_optimum(std::vector<double> positions, double opt) {
  if (positions.empty()) return positions;
  const auto [lo, hi] = std::minmax_element(positions.begin(), positions.end());
  const double tie_tol = 1e-9 * std::max(1.0, *hi - *lo);
  double best = std::numeric_limits<double>::infinity();
  for (double p : positions) best = std::min(best, std::abs(p - opt));
  std::size_t chosen = positions.size();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (std::abs(positions[i] - opt) <= best + tie_tol &&
        (chosen == positions.size() || positions[i] < positions[chosen])) {
      chosen = i;
    }
  }
  positions[chosen] = opt;
  return positions;
}

std::vector<double> quantile_positions(const std::function<double(double)>& qdist, int s,
                                       double lower, double upper) {
  if (s < 2) throw DomainError("slicing needs s >= 2");
  if (!(lower < upper)) throw DomainError("slicing needs lower < upper");
  std::vector<double> pos(static_cast<std::size_t>(s));
  for (int i = 1; i <= s; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(s + 1);
    const double v = qdist(p);
    if (!std::isfinite(v)) throw DomainError("quantile function returned a non-finite interior value");
    pos[static_cast<std::size_t>(i - 1)] = v;
  }
  const double first = pos.front();
  const double span = pos.back() - first;
  if (!(span > 0.0)) throw DomainError("quantile function is not increasing");
  for (auto& v : pos) v = (v - first) / span * (upper - lower) + lower;
  pos.front() = lower;
  pos.back() = upper;
  return pos;
}

double estimate_max(const std::function<double(std::span<const double>)>& g,
                    const std::vector<Interval>& bounds, const SliceMaxOptions& options) {
  if (options.grid < 2) throw DomainError("grid needs at least 2 points per dimension");
  const std::size_t d = bounds.size();
  if (d == 0) return g(std::span<const double>{});

  std::vector<double> spacing(d);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) {
    spacing[k] = (bounds[k].upper - bounds[k].lower) / (options.grid - 1);
    total *= static_cast<std::size_t>(options.grid);
  }
  const auto grid = static_cast<std::size_t>(options.grid);
  auto coords = [&](std::size_t flat) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t i = flat % grid;
      flat /= grid;
      x[k] = i == grid - 1 ? bounds[k].upper : bounds[k].lower + static_cast<double>(i) * spacing[k];
    }
    return x;
  };
  std::vector<double> values(total);
  for (std::size_t flat = 0; flat < total; ++flat) values[flat] = g(coords(flat));

  // Refine from the best grid-local maxima so the starts sit on distinct peaks.
  std::vector<std::size_t> peaks;
  for (std::size_t flat = 0; flat < total; ++flat) {
    bool peak = true;
    std::size_t rest = flat;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < d && peak; ++k) {
      const std::size_t i = rest % grid;
      rest /= grid;
      if (i > 0 && values[flat - stride] > values[flat]) peak = false;
      if (i + 1 < grid && values[flat + stride] > values[flat]) peak = false;
      stride *= grid;
    }
    if (peak) peaks.push_back(flat);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (options.refine_from > 0) peaks.resize(std::min(peaks.size(), static_cast<std::size_t>(options.refine_from)));

  double result = *std::max_element(values.begin(), values.end());
  for (std::size_t flat : peaks) {
    std::vector<double> x = coords(flat);
    double fx = values[flat];
    refine_max(g, bounds, x, fx, spacing, options.tolerance);
    result = std::max(result, fx);
  }
  return result;
}

SlicedFunction::SlicedFunction(ContinuousFunction base, int s, std::vector<int> upended, int sliced_dim,
                               const SliceMaxOptions& max_options)
    : base_(std::move(base)), sliced_dim_(sliced_dim), upended_(std::move(upended)) {
  if (base_.d < 2) throw DomainError("slicing needs a function of at least two dimensions");
  if (sliced_dim_ < 0 || sliced_dim_ >= base_.d) throw IndexError("sliced dimension out of range");
  const auto& b = base_.bounds[static_cast<std::size_t>(sliced_dim_)];
  const double opt = base_.opt_pos[static_cast<std::size_t>(sliced_dim_)];
  positions_ = swap_optimum(slice_positions(b.lower, b.upper, s), opt);
  for (int i = 0; i < s; ++i) {
    if (positions_[static_cast<std::size_t>(i)] == opt) optimum_slice_ = i + 1;
  }

  std::sort(upended_.begin(), upended_.end());
  upended_.erase(std::unique(upended_.begin(), upended_.end()), upended_.end());
  slice_max_.assign(static_cast<std::size_t>(s), std::nullopt);
  for (int slice : upended_) {
    check_slice(slice);
    if (slice == optimum_slice_) {
      throw DomainError("cannot upend slice " + std::to_string(slice) + ": it holds the global optimum");
    }
    slice_max_[static_cast<std::size_t>(slice - 1)] = estimate_slice_max(*this, slice, max_options);
  }
}

std::string SlicedFunction::name() const {
  std::string out = base_.name;
  if (!upended_.empty()) {
    out += "-upended";
    for (int i : upended_) out += "-" + std::to_string(i);
  }
  return out;
}

bool SlicedFunction::is_upended(int slice) const {
  return std::binary_search(upended_.begin(), upended_.end(), slice);
}

void SlicedFunction::check_slice(int slice) const {
  if (slice < 1 || slice > s()) {
    throw IndexError("slice " + std::to_string(slice) + " outside 1.." + std::to_string(s()));
  }
}

std::vector<Interval> SlicedFunction::rest_bounds() const {
  std::vector<Interval> out;
  for (int k = 0; k < base_.d; ++k) {
    if (k != sliced_dim_) out.push_back(base_.bounds[static_cast<std::size_t>(k)]);
  }
  return out;
}

std::optional<double> SlicedFunction::slice_max(int slice) const {
  check_slice(slice);
  return slice_max_[static_cast<std::size_t>(slice - 1)];
}

double SlicedFunction::base_value(int slice, std::span<const double> x_rest) const {
  check_slice(slice);
  if (static_cast<int>(x_rest.size()) != base_.d - 1) throw ArityError("x_rest has the wrong dimension");
  std::vector<double> full;
  full.reserve(static_cast<std::size_t>(base_.d));
  full.insert(full.end(), x_rest.begin(), x_rest.begin() + sliced_dim_);
  full.push_back(positions_[static_cast<std::size_t>(slice - 1)]);
  full.insert(full.end(), x_rest.begin() + sliced_dim_, x_rest.end());
  return base_.evaluate(full);
}

double SlicedFunction::operator()(int slice, std::span<const double> x_rest) const {
  const double f = base_value(slice, x_rest);
  const auto& ymax = slice_max_[static_cast<std::size_t>(slice - 1)];
  if (!ymax) return f;
  const double z = *ymax - f;
  return base_.opt_val + z * (1.0 - std::exp(-0.5 * z)) + *ymax / 10.0;
}

double eval_sliced(const SlicedFunction& fn, int slice, std::span<const double> x_rest) {
  return fn(slice, x_rest);
}

double estimate_slice_max(const SlicedFunction& fn, int slice, const SliceMaxOptions& options) {
  return estimate_max([&](std::span<const double> x) { return fn.base_value(slice, x); }, fn.rest_bounds(),
                      options);
}

CrossCorrEstimate empirical_cross_corr(const SlicedFunction& fn, int resolution) {
  if (resolution < 2) throw DomainError("resolution must be >= 2");
  const auto rest = fn.rest_bounds();
  if (rest.size() != 2) throw ArityError("empirical cross-correlation needs exactly two continuous dimensions");
  const int s = fn.s();
  const auto grid_points = static_cast<Eigen::Index>(resolution) * resolution;

  auto axis = [&](const Interval& b) {
    std::vector<double> v(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
      v[static_cast<std::size_t>(i)] = b.lower + i * (b.upper - b.lower) / (resolution - 1);
    }
    v.back() = b.upper;
    return v;
  };
  const auto ax = axis(rest[0]);
  const auto ay = axis(rest[1]);

  Eigen::MatrixXd values(grid_points, s);
  for (int slice = 1; slice <= s; ++slice) {
    Eigen::Index row = 0;
    for (double a : ax) {
      for (double b : ay) {
        const double pt[2] = {a, b};
        values(row++, slice - 1) = fn(slice, pt);
      }
    }
  }

  CrossCorrEstimate out;
  out.grid_resolution = resolution;
  out.matrix = Eigen::MatrixXd::Identity(s, s);
  Eigen::MatrixXd centered = values.rowwise() - values.colwise().mean();
  Eigen::VectorXd norms = centered.colwise().norm();
  for (int i = 0; i < s; ++i) {
    if (norms[i] == 0.0) {
      out.warnings.push_back("slice " + std::to_string(i + 1) + " is constant on the grid; its correlations are undefined");
    }
  }
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < i; ++j) {
      double r = std::numeric_limits<double>::quiet_NaN();
      if (norms[i] > 0.0 && norms[j] > 0.0) {
        r = std::clamp(centered.col(i).dot(centered.col(j)) / (norms[i] * norms[j]), -1.0, 1.0);
      }
      out.matrix(i, j) = r;
      out.matrix(j, i) = r;
    }
    if (norms[i] == 0.0) out.matrix(i, i) = 1.0;
  }
  return out;
}

std::vector<int> reference_upended_slices(int s) {
  if (s == 4) return {1, 3};
  if (s == 6) return {1, 2, 4};
  throw LookupError("no reference upend set for s = " + std::to_string(s));
}

SlicedFunction make_testbed_function(const std::string& name, int s) {
  const auto dash = name.find("-upended");
  if (dash == std::string::npos) return SlicedFunction(standard_function(name), s);
  const std::string base = name.substr(0, dash);
  std::string rest = name.substr(dash + 8);
  std::vector<int> slices;
  if (rest.empty()) {
    slices = reference_upended_slices(s);
  } else {
    std::istringstream in(rest);
    std::string tok;
    std::getline(in, tok, '-');  // leading empty token
    if (!tok.empty()) throw LookupError("malformed testbed function name '" + name + "'");
    while (std::getline(in, tok, '-')) {
      try {
        slices.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw LookupError("malformed testbed function name '" + name + "'");
      }
    }
  }
  return SlicedFunction(standard_function(base), s, slices);
}

std::vector<SlicedFunction> make_reference_testbed() {
  std::vector<SlicedFunction> out;
  for (int s : {4, 6}) {
    for (const auto& f : standard_functions()) out.emplace_back(f, s);
    for (const char* name : {"ackley", "alpine", "dcs"}) {
      out.emplace_back(standard_function(name), s, reference_upended_slices(s));
    }
  }
  return out;
}

}  // namespace mixgp
