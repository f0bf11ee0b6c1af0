#pragma once

// Parameterizations of the s x s cross-correlation matrix between the levels
// of a categorical input.
//
// Four families map a box-constrained parameter vector to a symmetric,
// unit-diagonal matrix with entries in [-1, 1]:
//
//   EC      one constant c in (0, 1) on every off-diagonal
//   MC      tau_ij = exp(-(phi_i + phi_j)), phi_i > 0
//   UC      P = L L^T with each row of the Cholesky factor L a point on the
//           unit hypersphere in spherical coordinates (s(s-1)/2 angles)
//   LRC_r   P = Q Q^T with Q an s x r loading matrix built by the same
//           spherical recursion truncated at column r ((r-1)(s - r/2) angles)
//
// Angle vectors are flattened row-major: row i = 2..s, column j = 1..m_i - 1
// where m_i = i for UC and m_i = min(i, r) for LRC_r.
//
// Level indices into CorrMatrix are 0-based.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mixgp {

enum class Family { EC, MC, UC, LRC };

std::string_view family_name(Family family);
Family parse_family(std::string_view name);

/// Default nugget used to make a psd correlation matrix strictly positive definite.
inline constexpr double kCorrNugget = 1e-8;
/// Distance kept between optimizer angle bounds and the open interval (0, pi).
inline constexpr double kAngleMargin = 1e-6;

struct FamilySpec {
  Family family = Family::EC;
  int s = 2;
  int rank = 0;  // LRC only

  static FamilySpec ec(int s) { return {Family::EC, s, 0}; }
  static FamilySpec mc(int s) { return {Family::MC, s, 0}; }
  static FamilySpec uc(int s) { return {Family::UC, s, 0}; }
  static FamilySpec lrc(int s, int rank) { return {Family::LRC, s, rank}; }

  /// Throws DomainError for s < 2 and RankError for a rank outside 2..s-1
  /// (or a rank given for a non-LRC family).
  void validate() const;

  /// Short label used in tables: "EC", "MC", "UC", "LRC3".
  std::string label() const;

  /// Inverse of label(); s must be supplied separately.
  static FamilySpec parse(std::string_view label, int s);

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

/// Number of free parameters of the family.
int param_count(const FamilySpec& spec);

struct ParamBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Box used by the optimizer for the categorical parameters of a family.
ParamBounds param_bounds(const FamilySpec& spec);

/// Symmetric, unit-diagonal matrix with entries in [-1, 1].
///
/// Builders return the exact (possibly only positive semidefinite) matrix of
/// the parameterization; pass it through regularize() before factorizing.
class CorrMatrix {
 public:
  /// Validates symmetry (within tol), unit diagonal (within tol) and the
  /// [-1, 1] range, then stores an exactly symmetric copy with diagonal 1.
  static CorrMatrix from_matrix(const Eigen::MatrixXd& m, double tol = 1e-12);

  int size() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& matrix() const { return m_; }

  /// True when an LLT factorization succeeds.
  bool cholesky_ok() const;

 private:
  explicit CorrMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;

  friend CorrMatrix make_corr_unchecked(Eigen::MatrixXd m);
};

/// s x r loading matrix whose rows have unit Euclidean norm.
class LoadingMatrix {
 public:
  explicit LoadingMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {}
  int rows() const { return static_cast<int>(q_.rows()); }
  int rank() const { return static_cast<int>(q_.cols()); }
  const Eigen::MatrixXd& matrix() const { return q_; }

 private:
  Eigen::MatrixXd q_;
};

CorrMatrix build_ec(double c, int s);
CorrMatrix build_mc(std::span<const double> phi, int s);
CorrMatrix build_uc(std::span<const double> theta, int s);

struct LowRankCorr {
  LoadingMatrix loadings;
  CorrMatrix corr;  // Q Q^T, not regularized
};

LowRankCorr build_lrc(std::span<const double> theta, int s, int rank);

/// Dispatches on the family. The result is not regularized.
CorrMatrix build_corr(const FamilySpec& spec, std::span<const double> params);

/// Returns (P + nugget I) / (1 + nugget) with the diagonal pinned to 1.
/// Throws NumericalRankError (carrying the smallest eigenvalue) if the
/// result still cannot be Cholesky-factorized.
CorrMatrix regularize(const CorrMatrix& p, double nugget = kCorrNugget);

/// UC angle vector reproducing the LRC_r matrix of `theta`.
///
/// For rows i > r the angle theta_{i,r} is set to `eps` (cos ~ 1, sin ~ eps)
/// and the trailing angles to pi/2. The entrywise gap between the two
/// matrices is O(eps).
std::vector<double> embed_lrc_in_uc(std::span<const double> theta, int s, int rank,
                                    double eps = 1e-9);

}  // namespace mixgp
