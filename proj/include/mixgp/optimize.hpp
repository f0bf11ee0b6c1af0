#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mixgp {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
  int max_evals = 2000;
  double f_tol = 1e-9;   // spread of simplex values
  double x_tol = 1e-7;   // simplex diameter (infinity norm)
  double initial_step = 0.2;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Bounded Nelder-Mead with adaptive coefficients. Every trial point is
/// projected onto the box [lower, upper]; non-finite objective values count
/// as +infinity. The returned value never exceeds f(x0).
OptimResult nelder_mead_box(const Objective& f, std::vector<double> x0,
                            std::span<const double> lower, std::span<const double> upper,
                            const NelderMeadOptions& options = {});

/// `count` points in [0, 1]^dim spread by greedy maximin selection from a
/// random candidate pool. The first point is the cube center.
std::vector<std::vector<double>> maximin_starts(int count, int dim, std::uint64_t seed,
                                                int pool_factor = 50);

}  // namespace mixgp
