#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mixgp/corrparam.hpp"
#include "mixgp/errors.hpp"

using namespace mixgp;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_params(const FamilySpec& spec, std::mt19937_64& rng) {
  const ParamBounds b = param_bounds(spec);
  std::vector<double> out(b.lower.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::uniform_real_distribution<double>(b.lower[i], b.upper[i])(rng);
  }
  return out;
}

// Straight transcription of the spherical-coordinate rows, independent of the
// library's flattening loop.
Eigen::MatrixXd oracle_loadings(const std::vector<double>& theta, int s, int cols) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(s, cols);
  l(0, 0) = 1.0;
  std::size_t k = 0;
  for (int i = 1; i < s; ++i) {
    const int m = std::min(i + 1, cols);
    std::vector<double> ang(theta.begin() + static_cast<long>(k), theta.begin() + static_cast<long>(k + m - 1));
    k += static_cast<std::size_t>(m - 1);
    double sin_prod = 1.0;
    for (int j = 0; j < m; ++j) {
      if (j < m - 1) {
        l(i, j) = std::cos(ang[static_cast<std::size_t>(j)]) * sin_prod;
        sin_prod *= std::sin(ang[static_cast<std::size_t>(j)]);
      } else {
        l(i, j) = sin_prod;
      }
    }
  }
  return l;
}

void expect_pdude(const CorrMatrix& p) {
  const Eigen::MatrixXd& m = p.matrix();
  for (int i = 0; i < p.size(); ++i) {
    EXPECT_EQ(m(i, i), 1.0);
    for (int j = 0; j < p.size(); ++j) {
      EXPECT_EQ(m(i, j), m(j, i));
      EXPECT_LE(std::abs(m(i, j)), 1.0);
    }
  }
}

}  // namespace

TEST(ParamCount, ReferenceCounts) {
  EXPECT_EQ(param_count(FamilySpec::ec(4)), 1);
  EXPECT_EQ(param_count(FamilySpec::ec(6)), 1);
  EXPECT_EQ(param_count(FamilySpec::mc(4)), 4);
  EXPECT_EQ(param_count(FamilySpec::mc(6)), 6);
  EXPECT_EQ(param_count(FamilySpec::lrc(4, 2)), 3);
  EXPECT_EQ(param_count(FamilySpec::lrc(6, 2)), 5);
  EXPECT_EQ(param_count(FamilySpec::lrc(4, 3)), 5);
  EXPECT_EQ(param_count(FamilySpec::lrc(6, 3)), 9);
  EXPECT_EQ(param_count(FamilySpec::lrc(6, 4)), 12);
  EXPECT_EQ(param_count(FamilySpec::lrc(6, 5)), 14);
  EXPECT_EQ(param_count(FamilySpec::uc(4)), 6);
  EXPECT_EQ(param_count(FamilySpec::uc(6)), 15);
}

TEST(ParamCount, LrcMatchesHalfIntegerFormula) {
  for (int s = 3; s <= 12; ++s) {
    for (int r = 2; r < s; ++r) {
      EXPECT_DOUBLE_EQ(param_count(FamilySpec::lrc(s, r)), (r - 1) * (s - r / 2.0));
    }
  }
}

TEST(ParamCount, LrcOfRankSMinusOneLacksOneUcAngle) {
  for (int s = 3; s <= 9; ++s) EXPECT_EQ(param_count(FamilySpec::lrc(s, s - 1)) + 1, param_count(FamilySpec::uc(s)));
}

TEST(ParamCount, RejectsBadRanks) {
  EXPECT_THROW(param_count(FamilySpec::lrc(4, 4)), RankError);
  EXPECT_THROW(param_count(FamilySpec::lrc(4, 1)), RankError);
  EXPECT_THROW(param_count(FamilySpec::ec(1)), DomainError);
  EXPECT_THROW(param_count(FamilySpec{Family::UC, 4, 2}), RankError);
}

TEST(FamilySpec, LabelsRoundTrip) {
  for (const auto& spec : {FamilySpec::ec(5), FamilySpec::mc(5), FamilySpec::uc(5), FamilySpec::lrc(5, 3)}) {
    EXPECT_EQ(FamilySpec::parse(spec.label(), 5), spec);
  }
  EXPECT_EQ(FamilySpec::parse("lrc2", 4), FamilySpec::lrc(4, 2));
  EXPECT_THROW(FamilySpec::parse("XYZ", 4), LookupError);
  EXPECT_THROW(FamilySpec::parse("LRCx", 4), LookupError);
  EXPECT_THROW(FamilySpec::parse("LRC9", 4), RankError);
}

TEST(BuildEc, Values) {
  const CorrMatrix p = build_ec(0.5, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(p(i, j), i == j ? 1.0 : 0.5);
  }
  const CorrMatrix q = build_ec(0.25, 2);
  EXPECT_EQ(q(0, 1), 0.25);
  EXPECT_NEAR((build_ec(1e-12, 4).matrix() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.0, 1e-11);
}

TEST(BuildEc, RejectsOutOfRange) {
  EXPECT_THROW(build_ec(0.0, 3), DomainError);
  EXPECT_THROW(build_ec(1.0, 3), DomainError);
  EXPECT_THROW(build_ec(-0.2, 3), DomainError);
}

TEST(BuildMc, Values) {
  const std::vector<double> half{0.5, 0.5};
  EXPECT_NEAR(build_mc(half, 2)(0, 1), std::exp(-1.0), 1e-15);
  const std::vector<double> ln2(3, std::log(2.0));
  const CorrMatrix p = build_mc(ln2, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(p(i, j), 0.25, 1e-15);
    }
  }
  const std::vector<double> big(4, 50.0);
  EXPECT_LT(build_mc(big, 4)(1, 2), 1e-40);
}

TEST(BuildMc, Errors) {
  const std::vector<double> three{1, 1, 1};
  EXPECT_THROW(build_mc(three, 4), ArityError);
  const std::vector<double> neg{1, -1, 1};
  EXPECT_THROW(build_mc(neg, 3), DomainError);
}

TEST(BuildUc, EcClosedForm) {
  const double c = 0.5;
  const std::vector<double> theta{std::acos(c), std::acos(c), std::acos(c / (c + 1))};
  const CorrMatrix p = build_uc(theta, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(p(i, j), i == j ? 1.0 : c, 1e-14);
  }
}

TEST(BuildUc, RightAnglesGiveIdentity) {
  const std::vector<double> theta(10, kPi / 2);
  EXPECT_NEAR((build_uc(theta, 5).matrix() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(BuildUc, MatchesLoadingOracleAndIsPositiveDefinite) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto theta = random_params(FamilySpec::uc(5), rng);
    const CorrMatrix p = build_uc(theta, 5);
    const Eigen::MatrixXd l = oracle_loadings(theta, 5, 5);
    EXPECT_LT((p.matrix() - l * l.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.matrix());
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(BuildUc, Errors) {
  const std::vector<double> short_theta{1.0, 1.0};
  EXPECT_THROW(build_uc(short_theta, 3), ArityError);
  const std::vector<double> outside{1.0, 1.0, 3.5};
  EXPECT_THROW(build_uc(outside, 3), DomainError);
  const std::vector<double> zero{0.0, 1.0, 1.0};
  EXPECT_THROW(build_uc(zero, 3), DomainError);
}

TEST(BuildLrc, OrthogonalLoadings) {
  const std::vector<double> theta{kPi / 2};
  EXPECT_THROW(build_lrc(theta, 2, 2), RankError);  // rank must stay below s
  const std::vector<double> t3{kPi / 2, 1.0};
  const LowRankCorr lr = build_lrc(t3, 3, 2);
  EXPECT_NEAR(lr.corr(0, 1), 0.0, 1e-15);
}

TEST(BuildLrc, RankTwoIsCosineOfDifferences) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto theta = random_params(FamilySpec::lrc(5, 2), rng);
    const CorrMatrix p = build_lrc(theta, 5, 2).corr;
    std::vector<double> full{0.0};
    full.insert(full.end(), theta.begin(), theta.end());
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        EXPECT_NEAR(p(i, j), std::cos(full[static_cast<std::size_t>(i)] - full[static_cast<std::size_t>(j)]), 1e-12);
      }
    }
  }
}

TEST(BuildLrc, ReachesStrongNegativeCorrelation) {
  const double e = 1e-4;
  const std::vector<double> theta{kPi - e, e, kPi - e};
  const CorrMatrix p = build_lrc(theta, 4, 2).corr;
  EXPECT_LT(p(0, 1), -0.999);
  EXPECT_GT(p(0, 2), 0.999);
  EXPECT_LT(p(0, 3), -0.999);
  EXPECT_LT(p(1, 2), -0.999);
}

TEST(BuildLrc, RowsHaveUnitNormAndRankAtMostR) {
  std::mt19937_64 rng(11);
  for (int r = 2; r < 7; ++r) {
    const auto theta = random_params(FamilySpec::lrc(7, r), rng);
    const LowRankCorr lr = build_lrc(theta, 7, r);
    EXPECT_EQ(lr.loadings.rank(), r);
    EXPECT_EQ(lr.loadings.rows(), 7);
    for (int i = 0; i < 7; ++i) EXPECT_NEAR(lr.loadings.matrix().row(i).squaredNorm(), 1.0, 1e-12);
    const Eigen::MatrixXd l = oracle_loadings(theta, 7, r);
    EXPECT_LT((lr.loadings.matrix() - l).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(lr.corr.matrix());
    svd.setThreshold(1e-10);
    EXPECT_LE(svd.rank(), r);
  }
}

TEST(Regularize, AllOnesAndIdentity) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const CorrMatrix p = regularize(CorrMatrix::from_matrix(ones), 1e-8);
  EXPECT_NEAR(p(0, 1), 1.0 / (1.0 + 1e-8), 1e-16);
  EXPECT_EQ(p(1, 1), 1.0);
  EXPECT_TRUE(p.cholesky_ok());
  const CorrMatrix id = regularize(CorrMatrix::from_matrix(Eigen::MatrixXd::Identity(4, 4)));
  EXPECT_EQ((id.matrix() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Regularize, LowRankSmallestEigenvalue) {
  std::mt19937_64 rng(5);
  const auto theta = random_params(FamilySpec::lrc(5, 2), rng);
  const double nugget = 1e-8;
  const CorrMatrix p = regularize(build_lrc(theta, 5, 2).corr, nugget);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.matrix());
  EXPECT_GE(eig.eigenvalues().minCoeff(), nugget / (1 + nugget) * (1 - 1e-6));
}

TEST(Regularize, IndefiniteInputReportsEigenvalue) {
  Eigen::MatrixXd m(3, 3);
  m << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  try {
    regularize(CorrMatrix::from_matrix(m));
    FAIL() << "expected NumericalRankError";
  } catch (const NumericalRankError& e) {
    EXPECT_LT(e.smallest_eigenvalue(), 0.0);
  }
}

TEST(CorrMatrix, FromMatrixValidates) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(0, 1) = 0.3;
  EXPECT_THROW(CorrMatrix::from_matrix(m), DomainError);
  m(1, 0) = 0.3;
  EXPECT_NO_THROW(CorrMatrix::from_matrix(m));
  m(2, 2) = 1.1;
  EXPECT_THROW(CorrMatrix::from_matrix(m), DomainError);
  EXPECT_THROW(CorrMatrix::from_matrix(Eigen::MatrixXd::Identity(2, 3)), ArityError);
}

TEST(Embedding, LrcInsideUc) {
  std::mt19937_64 rng(17);
  for (const auto& [s, r] : std::vector<std::pair<int, int>>{{4, 2}, {4, 3}, {6, 2}, {6, 3}, {6, 5}}) {
    for (int rep = 0; rep < 100; ++rep) {
      const auto theta = random_params(FamilySpec::lrc(s, r), rng);
      const auto uc = embed_lrc_in_uc(theta, s, r);
      ASSERT_EQ(static_cast<int>(uc.size()), param_count(FamilySpec::uc(s)));
      const double gap = (build_uc(uc, s).matrix() - build_lrc(theta, s, r).corr.matrix()).cwiseAbs().maxCoeff();
      EXPECT_LT(gap, 1e-6);
    }
  }
}

TEST(Embedding, RankSMinusOneOnlySubstitutesEps) {
  std::mt19937_64 rng(19);
  const auto theta = random_params(FamilySpec::lrc(5, 4), rng);
  const auto uc = embed_lrc_in_uc(theta, 5, 4, 1e-9);
  // Only the last row gains an angle.
  ASSERT_EQ(uc.size(), theta.size() + 1);
  for (std::size_t k = 0; k < theta.size(); ++k) EXPECT_EQ(uc[k], theta[k]);
  EXPECT_EQ(uc.back(), 1e-9);
}

TEST(Property, EveryFamilyGivesValidMatrices) {
  std::mt19937_64 rng(2024);
  for (int s = 2; s <= 8; ++s) {
    std::vector<FamilySpec> specs{FamilySpec::ec(s), FamilySpec::mc(s), FamilySpec::uc(s)};
    for (int r = 2; r < s; ++r) specs.push_back(FamilySpec::lrc(s, r));
    for (const auto& spec : specs) {
      for (int rep = 0; rep < 200; ++rep) {
        const CorrMatrix p = build_corr(spec, random_params(spec, rng));
        expect_pdude(p);
        EXPECT_TRUE(regularize(p).cholesky_ok()) << spec.label();
      }
    }
  }
}

TEST(Property, McNeverNegative) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 500; ++rep) {
    const CorrMatrix p = build_corr(FamilySpec::mc(6), random_params(FamilySpec::mc(6), rng));
    EXPECT_GT(p.matrix().minCoeff(), 0.0);
  }
}
