#include <gtest/gtest.h>

#include <cmath>

#include "mixgp/optimize.hpp"

using namespace mixgp;

TEST(NelderMead, FindsInteriorMinimum) {
  const Objective f = [](std::span<const double> x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] - 0.7) * (x[1] - 0.7);
  };
  const std::vector<double> lo{0, 0}, hi{1, 1};
  const OptimResult r = nelder_mead_box(f, {0.9, 0.1}, lo, hi);
  EXPECT_NEAR(r.x[0], 0.3, 1e-4);
  EXPECT_NEAR(r.x[1], 0.7, 1e-4);
  EXPECT_TRUE(r.converged);
}

TEST(NelderMead, StaysInsideBoxAndFindsBoundaryMinimum) {
  const Objective f = [](std::span<const double> x) {
    EXPECT_GE(x[0], -1.0);
    EXPECT_LE(x[0], 1.0);
    EXPECT_GE(x[1], -1.0);
    EXPECT_LE(x[1], 1.0);
    return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 0.2) * (x[1] + 0.2);
  };
  const std::vector<double> lo{-1, -1}, hi{1, 1};
  const OptimResult r = nelder_mead_box(f, {0.0, 0.0}, lo, hi);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], -0.2, 1e-4);
}

TEST(NelderMead, RosenbrockInFourDimensions) {
  const Objective f = [](std::span<const double> x) {
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) v += 100 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1 - x[i], 2);
    return v;
  };
  const std::vector<double> lo(4, -2.0), hi(4, 2.0);
  NelderMeadOptions opts;
  opts.max_evals = 20000;
  opts.f_tol = 1e-14;
  opts.x_tol = 1e-10;
  OptimResult r = nelder_mead_box(f, {-1.0, 1.5, 0.5, -0.5}, lo, hi, opts);
  r = nelder_mead_box(f, r.x, lo, hi, opts);
  EXPECT_LT(r.value, 1e-6);
}

TEST(NelderMead, NeverWorseThanStartAndToleratesNonFinite) {
  const Objective f = [](std::span<const double> x) {
    if (x[0] > 0.5) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(x[0] - 0.2);
  };
  const std::vector<double> lo{0}, hi{1};
  const OptimResult r = nelder_mead_box(f, {0.45}, lo, hi);
  EXPECT_LE(r.value, 0.25);
  EXPECT_NEAR(r.x[0], 0.2, 1e-4);
}

TEST(NelderMead, RespectsEvaluationBudget) {
  int calls = 0;
  const Objective f = [&](std::span<const double> x) {
    ++calls;
    return std::sin(30 * x[0]) + std::cos(17 * x[1]);
  };
  const std::vector<double> lo{0, 0}, hi{1, 1};
  NelderMeadOptions opts;
  opts.max_evals = 50;
  const OptimResult r = nelder_mead_box(f, {0.5, 0.5}, lo, hi, opts);
  EXPECT_LE(r.evaluations, 50 + 3);
  EXPECT_EQ(r.evaluations, calls);
}

TEST(MaximinStarts, CenterFirstInsideCubeAndDeterministic) {
  const auto a = maximin_starts(10, 3, 7);
  const auto b = maximin_starts(10, 3, 7);
  const auto c = maximin_starts(10, 3, 8);
  ASSERT_EQ(a.size(), 10u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (double v : a[0]) EXPECT_EQ(v, 0.5);
  for (const auto& p : a) {
    ASSERT_EQ(p.size(), 3u);
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(MaximinStarts, SpreadBeatsPlainUniformDraws) {
  auto min_dist = [](const std::vector<std::vector<double>>& pts) {
    double best = 1e9;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        double d = 0;
        for (std::size_t k = 0; k < pts[i].size(); ++k) d += std::pow(pts[i][k] - pts[j][k], 2);
        best = std::min(best, std::sqrt(d));
      }
    }
    return best;
  };
  const auto spread = maximin_starts(10, 2, 1);
  const auto crowded = maximin_starts(10, 2, 1, 1);
  EXPECT_GT(min_dist(spread), min_dist(crowded));
}
