#include "mixgp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mixgp/errors.hpp"

namespace mixgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void project(std::vector<double>& x, std::span<const double> lo, std::span<const double> hi) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

}  // namespace

OptimResult nelder_mead_box(const Objective& f, std::vector<double> x0,
                            std::span<const double> lower, std::span<const double> upper,
                            const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n) throw ArityError("bounds do not match x0");

  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  project(x0, lower, upper);
  if (n == 0) return {x0, eval(x0), evals, true};

  // Adaptive coefficients (Gao & Han) behave better than the classic ones
  // once the dimension exceeds a handful of parameters.
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 1.0 / (2.0 * dn);
  const double delta = 1.0 - 1.0 / dn;

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  values[0] = eval(x0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = simplex[i + 1];
    const double step = options.initial_step * (upper[i] - lower[i]);
    v[i] = x0[i] + step <= upper[i] ? x0[i] + step : x0[i] - step;
    project(v, lower, upper);
    values[i + 1] = eval(v);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  bool converged = false;

  while (evals < options.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
      }
    }
    if (std::isfinite(values[worst]) && values[worst] - values[best] <= options.f_tol &&
        diameter <= options.x_tol) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / dn;
    }

    for (std::size_t k = 0; k < n; ++k) {
      trial[k] = centroid[k] + alpha * (centroid[k] - simplex[worst][k]);
    }
    project(trial, lower, upper);
    const double f_reflect = eval(trial);

    if (f_reflect < values[best]) {
      for (std::size_t k = 0; k < n; ++k) {
        trial2[k] = centroid[k] + beta * (trial[k] - centroid[k]);
      }
      project(trial2, lower, upper);
      const double f_expand = eval(trial2);
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
      continue;
    }

    const bool outside = f_reflect < values[worst];
    for (std::size_t k = 0; k < n; ++k) {
      trial2[k] = outside ? centroid[k] + gamma * (trial[k] - centroid[k])
                          : centroid[k] - gamma * (centroid[k] - simplex[worst][k]);
    }
    project(trial2, lower, upper);
    const double f_contract = eval(trial2);
    if (f_contract < std::min(f_reflect, values[worst]) ||
        (outside && f_contract <= f_reflect)) {
      simplex[worst] = trial2;
      values[worst] = f_contract;
      continue;
    }

    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) {
        simplex[i][k] = simplex[best][k] + delta * (simplex[i][k] - simplex[best][k]);
      }
      values[i] = eval(simplex[i]);
    }
  }

  const auto it = std::min_element(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(it - values.begin());
  return {simplex[idx], *it, evals, converged};
}

std::vector<std::vector<double>> maximin_starts(int count, int dim, std::uint64_t seed,
                                                int pool_factor) {
  if (count < 1 || dim < 0) throw DomainError("maximin_starts needs count >= 1 and dim >= 0");
  std::vector<std::vector<double>> chosen;
  chosen.emplace_back(static_cast<std::size_t>(dim), 0.5);
  if (count == 1 || dim == 0) return chosen;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int pool_size = std::max(count * pool_factor, count);
  std::vector<std::vector<double>> pool(static_cast<std::size_t>(pool_size),
                                        std::vector<double>(static_cast<std::size_t>(dim)));
  for (auto& p : pool) {
    for (auto& v : p) v = unit(rng);
  }

  std::vector<double> min_dist(pool.size(), kInf);
  auto update = [&](const std::vector<double>& c) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double d = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double diff = pool[i][k] - c[k];
        d += diff * diff;
      }
      min_dist[i] = std::min(min_dist[i], d);
    }
  };
  update(chosen.front());
  while (static_cast<int>(chosen.size()) < count) {
    const auto far = static_cast<std::size_t>(
        std::max_element(min_dist.begin(), min_dist.end()) - min_dist.begin());
    chosen.push_back(pool[far]);
    update(pool[far]);
  }
  return chosen;
}

}  // namespace mixgp
