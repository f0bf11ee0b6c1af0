#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

#include "mixgp/errors.hpp"
#include "mixgp/testbed.hpp"
#include "reference_tables.hpp"

using namespace mixgp;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

double grid_extreme(const SlicedFunction& fn, int slice, int n, bool maximum, bool base = false) {
  const auto b = fn.rest_bounds();
  const auto g0 = linspace(b[0].lower, b[0].upper, n);
  const auto g1 = linspace(b[1].lower, b[1].upper, n);
  double best = maximum ? -1e300 : 1e300;
  for (double a : g0) {
    for (double c : g1) {
      const std::vector<double> x{a, c};
      const double v = base ? fn.base_value(slice, x) : fn(slice, x);
      best = maximum ? std::max(best, v) : std::min(best, v);
    }
  }
  return best;
}

int negative_pairs(const CrossCorrEstimate& e) {
  int count = 0;
  for (int i = 0; i < e.size(); ++i) {
    for (int j = 0; j < i; ++j) count += e.matrix(i, j) < 0.0;
  }
  return count;
}

}  // namespace

TEST(StandardFunctions, OptimaAndBounds) {
  const auto fns = standard_functions();
  ASSERT_EQ(fns.size(), 4u);
  for (const auto& f : fns) {
    EXPECT_EQ(f.d, 3);
    EXPECT_NEAR(f(f.opt_pos), f.opt_val, 1e-9) << f.name;
    for (int k = 0; k < f.d; ++k) {
      EXPECT_GE(f.opt_pos[k], f.bounds[k].lower);
      EXPECT_LE(f.opt_pos[k], f.bounds[k].upper);
    }
  }
  EXPECT_EQ(standard_function("ackley").bounds[0].upper, 32.77);
  EXPECT_EQ(standard_function("doublesum").bounds[0].lower, -65.54);
  EXPECT_EQ(standard_function("dcs").opt_val, -1.0);
  EXPECT_THROW(standard_function("rastrigin"), LookupError);
}

TEST(StandardFunctions, DirectFormulas) {
  const std::vector<double> x{1.0, -2.0, 0.5};
  const double pi = std::numbers::pi;
  const double ack = -20 * std::exp(-0.2 * std::sqrt((1 + 4 + 0.25) / 3.0)) -
                     std::exp((std::cos(2 * pi) + std::cos(-4 * pi) + std::cos(pi)) / 3.0) + 20 + std::exp(1.0);
  EXPECT_NEAR(standard_function("ackley")(x), ack, 1e-12);
  double alp = 0;
  for (double v : x) alp += std::abs(v * std::sin(v) + 0.1 * v);
  EXPECT_NEAR(standard_function("alpine")(x), alp, 1e-12);
  const double r2 = 16 + 49 + 20.25;
  EXPECT_NEAR(standard_function("dcs")(x), 0.1 * r2 - std::cos(5 * std::sqrt(r2)), 1e-12);
  EXPECT_NEAR(standard_function("doublesum")(x), 1 + 1 + 0.25, 1e-12);
}

TEST(SlicePositions, Formula) {
  const auto p = slice_positions(0, 10, 4);
  EXPECT_EQ(p.front(), 0.0);
  EXPECT_NEAR(p[1], 10.0 / 3, 1e-14);
  EXPECT_NEAR(p[2], 20.0 / 3, 1e-14);
  EXPECT_EQ(p.back(), 10.0);
  const auto a = slice_positions(-32.77, 32.77, 6);
  const std::vector<double> expect{-32.77, -19.662, -6.554, 6.554, 19.662, 32.77};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(a[i], expect[i], 1e-12);
  EXPECT_EQ(slice_positions(-1, 1, 2), (std::vector<double>{-1, 1}));
  EXPECT_THROW(slice_positions(0, 1, 1), DomainError);
}

TEST(SwapOptimum, TieRules) {
  const auto ack = swap_optimum(slice_positions(-32.77, 32.77, 4), 0.0);
  EXPECT_EQ(ack[1], 0.0);
  EXPECT_NEAR(ack[2], 10.92, 0.005);
  const auto d = swap_optimum(slice_positions(0, 10, 4), 5.0);
  EXPECT_EQ(d[1], 5.0);
  EXPECT_NEAR(d[2], 6.67, 0.005);
  const std::vector<double> already{0, 5, 10};
  EXPECT_EQ(swap_optimum(already, 5.0), already);
  EXPECT_EQ(swap_optimum({0, 4, 10}, 6.0), (std::vector<double>{0, 6, 10}));
}

TEST(SlicedFunction, PublishedPositions) {
  for (const auto& row : published_positions()) {
    const SlicedFunction f(standard_function(row.function), row.s);
    ASSERT_EQ(f.positions().size(), row.positions.size());
    for (std::size_t i = 0; i < row.positions.size(); ++i) {
      EXPECT_NEAR(f.positions()[i], row.positions[i], 0.005) << row.function << " s=" << row.s;
    }
    int hits = 0;
    for (double p : f.positions()) hits += p == standard_function(row.function).opt_pos[0];
    EXPECT_EQ(hits, 1);
  }
}

TEST(SlicedFunction, RejectsUpendingTheOptimumSlice) {
  EXPECT_THROW(SlicedFunction(standard_function("ackley"), 4, {2}), DomainError);
  EXPECT_THROW(SlicedFunction(standard_function("ackley"), 4, {5}), IndexError);
  const SlicedFunction f(standard_function("ackley"), 4);
  const std::vector<double> x{0, 0};
  EXPECT_THROW(f(0, x), IndexError);
  EXPECT_THROW(f(5, x), IndexError);
}

TEST(SlicedFunction, Names) {
  EXPECT_EQ(make_testbed_function("ackley", 4).name(), "ackley");
  EXPECT_EQ(make_testbed_function("ackley-upended", 4).name(), "ackley-upended-1-3");
  EXPECT_EQ(make_testbed_function("dcs-upended", 6).upended(), (std::vector<int>{1, 2, 4}));
  EXPECT_EQ(make_testbed_function("alpine-upended-1-4", 4).upended(), (std::vector<int>{1, 4}));
  EXPECT_THROW(make_testbed_function("ackley-upended-x", 4), LookupError);
}

TEST(SlicedFunction, OptimumValueAtOptimumSlice) {
  for (const auto& base : standard_functions()) {
    const SlicedFunction f(base, 4);
    const std::vector<double> rest(base.opt_pos.begin() + 1, base.opt_pos.end());
    EXPECT_NEAR(f(f.optimum_slice(), rest), base.opt_val, 1e-12);
    EXPECT_EQ(eval_sliced(f, f.optimum_slice(), rest), f(f.optimum_slice(), rest));
  }
}

TEST(SlicedFunction, UpendedFloorAndValueAtMaximizer) {
  const SlicedFunction f = make_testbed_function("ackley-upended", 4);
  const double y_star = f.base().opt_val;
  for (int slice : f.upended()) {
    const double ymax = *f.slice_max(slice);
    const double floor = y_star + ymax / 10;
    const auto b = f.rest_bounds();
    for (double a : linspace(b[0].lower, b[0].upper, 60)) {
      for (double c : linspace(b[1].lower, b[1].upper, 60)) {
        const std::vector<double> x{a, c};
        EXPECT_GE(f(slice, x), floor - 1e-9);
        const double z = ymax - f.base_value(slice, x);
        EXPECT_NEAR(f(slice, x), y_star + z * (1 - std::exp(-z / 2)) + ymax / 10, 1e-12);
      }
    }
  }
  EXPECT_FALSE(f.slice_max(2).has_value());
}

TEST(SlicedFunction, GlobalOptimumPreservedOnEveryTestbedFunction) {
  for (const auto& f : make_reference_testbed()) {
    const double y_star = f.base().opt_val;
    double best_plain = 1e300;
    for (int slice = 1; slice <= f.s(); ++slice) {
      const double m = grid_extreme(f, slice, 101, false);
      if (f.is_upended(slice)) {
        EXPECT_GT(m, y_star + 1e-6) << f.name();
        EXPECT_GE(m, y_star + *f.slice_max(slice) / 10 - 1e-9) << f.name();
      } else {
        best_plain = std::min(best_plain, m);
      }
    }
    EXPECT_NEAR(best_plain, y_star, 1e-6) << f.name() << " s=" << f.s();
  }
}

TEST(EstimateMax, AffineConstantAndAckley) {
  const std::vector<Interval> box{{-1, 2}, {0, 5}};
  EXPECT_NEAR(estimate_max([](std::span<const double> x) { return 3 * x[0] - x[1] + 1; }, box), 7.0, 1e-12);
  EXPECT_EQ(estimate_max([](std::span<const double>) { return 4.25; }, box), 4.25);
  const SlicedFunction f(standard_function("ackley"), 4);
  const double est = estimate_slice_max(f, 1);
  const double brute = grid_extreme(f, 1, 1000, true, true);
  EXPECT_NEAR(est, brute, 1e-3);
}

TEST(QuantilePositions, UniformNormalAndEndpoints) {
  const auto u = quantile_positions([](double p) { return p; }, 4, 0, 10);
  const auto eq = slice_positions(0, 10, 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(u[i], eq[i], 1e-12);
  const boost::math::normal_distribution<double> normal;
  const auto n = quantile_positions([&](double p) { return boost::math::quantile(normal, p); }, 6, -1, 1);
  EXPECT_EQ(n.front(), -1.0);
  EXPECT_EQ(n.back(), 1.0);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(n[i], -n[5 - i], 1e-12);
  EXPECT_LT(n[3] - n[2], n[1] - n[0]);
  EXPECT_THROW(quantile_positions([](double) { return NAN; }, 4, 0, 1), DomainError);
}

TEST(EmpiricalCrossCorr, ValidMatrix) {
  const auto e = empirical_cross_corr(make_testbed_function("dcs-upended", 4), 50);
  EXPECT_EQ(e.grid_resolution, 50);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(e.matrix(i, i), 1.0);
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(e.matrix(i, j), e.matrix(j, i));
      EXPECT_LE(std::abs(e.matrix(i, j)), 1.0);
    }
  }
}

TEST(EmpiricalCrossCorr, NegativePairCounts) {
  for (const char* name : {"ackley", "alpine", "dcs"}) {
    for (int s : {4, 6}) {
      EXPECT_EQ(negative_pairs(empirical_cross_corr(make_testbed_function(name, s))), 0) << name;
      const auto up = empirical_cross_corr(make_testbed_function(std::string(name) + "-upended", s));
      EXPECT_EQ(negative_pairs(up), s == 4 ? 4 : 9) << name << " s=" << s;
    }
  }
}

TEST(EmpiricalCrossCorr, ConstantSliceIsMissing) {
  ContinuousFunction flat;
  flat.name = "flat-first";
  flat.d = 3;
  flat.bounds = {{0, 1}, {0, 1}, {0, 1}};
  flat.evaluate = [](std::span<const double> x) { return x[0] < 0.5 ? 1.0 : x[1] + x[2] * x[2]; };
  flat.opt_pos = {1, 0, 0};
  flat.opt_val = 0.0;
  const auto e = empirical_cross_corr(SlicedFunction(flat, 3), 20);
  EXPECT_TRUE(e.missing(0, 1));
  EXPECT_FALSE(e.missing(1, 2));
  EXPECT_FALSE(e.warnings.empty());
}

TEST(ReferenceTestbed, FourteenFunctions) {
  const auto all = make_reference_testbed();
  EXPECT_EQ(all.size(), 14u);
  for (const auto& f : all) {
    for (int u : f.upended()) EXPECT_NE(u, f.optimum_slice()) << f.name();
  }
  EXPECT_EQ(reference_upended_slices(4), (std::vector<int>{1, 3}));
  EXPECT_THROW(reference_upended_slices(5), LookupError);
}
