#include "mixgp/corrparam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mixgp/errors.hpp"

namespace mixgp {

namespace {

constexpr double kEcMargin = 1e-6;
constexpr double kMcLower = 1e-6;
constexpr double kMcUpper = 6.0;

void require_angles(std::span<const double> theta) {
  for (double t : theta) {
    if (!(t > 0.0 && t < std::numbers::pi)) {
      std::ostringstream os;
      os << "angle " << t << " outside (0, pi)";
      throw DomainError(os.str());
    }
  }
}

// Number of angles stored for row i (1-based) when rows are truncated at `cols`.
int angles_in_row(int i, int cols) { return std::min(i, cols) - 1; }

int angle_count(int s, int cols) {
  int total = 0;
  for (int i = 2; i <= s; ++i) total += angles_in_row(i, cols);
  return total;
}

// Spherical-coordinate recursion shared by UC (cols = s) and LRC_r (cols = r).
// Row 1 is (1, 0, ..., 0); row i has min(i, cols) nonzero entries.
Eigen::MatrixXd hypersphere_loadings(std::span<const double> theta, int s, int cols) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(s, cols);
  q(0, 0) = 1.0;
  std::size_t k = 0;
  for (int i = 2; i <= s; ++i) {
    const int m = std::min(i, cols);
    double sin_prod = 1.0;
    for (int j = 1; j < m; ++j) {
      const double t = theta[k++];
      q(i - 1, j - 1) = std::cos(t) * sin_prod;
      sin_prod *= std::sin(t);
    }
    q(i - 1, m - 1) = sin_prod;
  }
  return q;
}

// Pins the diagonal to 1, symmetrizes exactly and clips rounding excursions
// beyond [-1, 1].
Eigen::MatrixXd tidy(Eigen::MatrixXd m) {
  const Eigen::Index s = m.rows();
  for (Eigen::Index i = 0; i < s; ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = std::clamp(0.5 * (m(i, j) + m(j, i)), -1.0, 1.0);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

}  // namespace

CorrMatrix make_corr_unchecked(Eigen::MatrixXd m) { return CorrMatrix(std::move(m)); }

std::string_view family_name(Family family) {
  switch (family) {
    case Family::EC: return "EC";
    case Family::MC: return "MC";
    case Family::UC: return "UC";
    case Family::LRC: return "LRC";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "EC") return Family::EC;
  if (upper == "MC") return Family::MC;
  if (upper == "UC") return Family::UC;
  if (upper == "LRC") return Family::LRC;
  throw LookupError("unknown correlation family '" + std::string(name) + "'");
}

void FamilySpec::validate() const {
  if (s < 2) throw DomainError("level count s must be >= 2, got " + std::to_string(s));
  if (family == Family::LRC) {
    if (rank < 2 || rank >= s) {
      throw RankError("LRC rank must satisfy 2 <= r < s (s=" + std::to_string(s) +
                      ", r=" + std::to_string(rank) + ")");
    }
  } else if (rank != 0) {
    throw RankError("rank is only meaningful for the LRC family");
  }
}

std::string FamilySpec::label() const {
  std::string out(family_name(family));
  if (family == Family::LRC) out += std::to_string(rank);
  return out;
}

FamilySpec FamilySpec::parse(std::string_view label, int s) {
  std::string upper(label);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  FamilySpec spec;
  spec.s = s;
  if (upper.rfind("LRC", 0) == 0 && upper.size() > 3) {
    spec.family = Family::LRC;
    try {
      std::size_t used = 0;
      spec.rank = std::stoi(upper.substr(3), &used);
      if (used != upper.size() - 3) throw std::invalid_argument(upper);
    } catch (const std::exception&) {
      throw LookupError("malformed LRC label '" + std::string(label) + "'");
    }
  } else {
    spec.family = parse_family(upper);
  }
  spec.validate();
  return spec;
}

int param_count(const FamilySpec& spec) {
  spec.validate();
  const int s = spec.s;
  switch (spec.family) {
    case Family::EC: return 1;
    case Family::MC: return s;
    case Family::UC: return s * (s - 1) / 2;
    case Family::LRC: {
      const int r = spec.rank;
      return (r - 1) * s - r * (r - 1) / 2;
    }
  }
  return 0;
}

ParamBounds param_bounds(const FamilySpec& spec) {
  const auto n = static_cast<std::size_t>(param_count(spec));
  ParamBounds b;
  switch (spec.family) {
    case Family::EC:
      b.lower.assign(n, kEcMargin);
      b.upper.assign(n, 1.0 - kEcMargin);
      break;
    case Family::MC:
      b.lower.assign(n, kMcLower);
      b.upper.assign(n, kMcUpper);
      break;
    case Family::UC:
    case Family::LRC:
      b.lower.assign(n, kAngleMargin);
      b.upper.assign(n, std::numbers::pi - kAngleMargin);
      break;
  }
  return b;
}

CorrMatrix CorrMatrix::from_matrix(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw ArityError("correlation matrix must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m(i, i) - 1.0) > tol) throw DomainError("diagonal entry differs from 1");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) throw DomainError("non-finite correlation entry");
      if (std::abs(m(i, j) - m(j, i)) > tol) throw DomainError("matrix is not symmetric");
      if (std::abs(m(i, j)) > 1.0 + tol) throw DomainError("correlation entry outside [-1, 1]");
    }
  }
  return CorrMatrix(tidy(m));
}

bool CorrMatrix::cholesky_ok() const {
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  return llt.info() == Eigen::Success;
}

CorrMatrix build_ec(double c, int s) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("EC parameter c must lie in (0, 1)");
  if (s < 2) throw DomainError("level count s must be >= 2");
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(s, s, c);
  m.diagonal().setOnes();
  return make_corr_unchecked(std::move(m));
}

CorrMatrix build_mc(std::span<const double> phi, int s) {
  if (s < 2) throw DomainError("level count s must be >= 2");
  if (static_cast<int>(phi.size()) != s) {
    throw ArityError("MC expects " + std::to_string(s) + " parameters, got " +
                     std::to_string(phi.size()));
  }
  for (double p : phi) {
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("MC parameters must be positive");
  }
  Eigen::MatrixXd m(s, s);
  for (int i = 0; i < s; ++i) {
    m(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      const double v = std::exp(-(phi[i] + phi[j]));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return make_corr_unchecked(std::move(m));
}

CorrMatrix build_uc(std::span<const double> theta, int s) {
  const FamilySpec spec = FamilySpec::uc(s);
  const int expected = param_count(spec);
  if (static_cast<int>(theta.size()) != expected) {
    throw ArityError("UC expects " + std::to_string(expected) + " angles, got " +
                     std::to_string(theta.size()));
  }
  require_angles(theta);
  const Eigen::MatrixXd l = hypersphere_loadings(theta, s, s);
  return make_corr_unchecked(tidy(l * l.transpose()));
}

LowRankCorr build_lrc(std::span<const double> theta, int s, int rank) {
  const FamilySpec spec = FamilySpec::lrc(s, rank);
  const int expected = param_count(spec);
  if (static_cast<int>(theta.size()) != expected) {
    throw ArityError("LRC" + std::to_string(rank) + " expects " + std::to_string(expected) +
                     " angles, got " + std::to_string(theta.size()));
  }
  require_angles(theta);
  Eigen::MatrixXd q = hypersphere_loadings(theta, s, rank);
  Eigen::MatrixXd p = tidy(q * q.transpose());
  return {LoadingMatrix(std::move(q)), make_corr_unchecked(std::move(p))};
}

CorrMatrix build_corr(const FamilySpec& spec, std::span<const double> params) {
  spec.validate();
  switch (spec.family) {
    case Family::EC:
      if (params.size() != 1) throw ArityError("EC expects exactly one parameter");
      return build_ec(params[0], spec.s);
    case Family::MC: return build_mc(params, spec.s);
    case Family::UC: return build_uc(params, spec.s);
    case Family::LRC: return build_lrc(params, spec.s, spec.rank).corr;
  }
  throw LookupError("unknown family");
}

CorrMatrix regularize(const CorrMatrix& p, double nugget) {
  if (!(nugget > 0.0)) throw DomainError("nugget must be positive");
  const Eigen::Index s = p.size();
  Eigen::MatrixXd m = (p.matrix() + nugget * Eigen::MatrixXd::Identity(s, s)) / (1.0 + nugget);
  m.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    std::ostringstream os;
    os << "correlation matrix not positive definite after nugget " << nugget
       << " (smallest eigenvalue " << smallest << ")";
    throw NumericalRankError(os.str(), smallest);
  }
  return make_corr_unchecked(std::move(m));
}

std::vector<double> embed_lrc_in_uc(std::span<const double> theta, int s, int rank, double eps) {
  const FamilySpec spec = FamilySpec::lrc(s, rank);
  if (static_cast<int>(theta.size()) != param_count(spec)) {
    throw ArityError("LRC parameter vector has the wrong length");
  }
  require_angles(theta);
  if (!(eps > 0.0 && eps < std::numbers::pi / 2)) throw DomainError("eps must lie in (0, pi/2)");

  std::vector<double> uc;
  uc.reserve(static_cast<std::size_t>(angle_count(s, s)));
  std::size_t k = 0;
  for (int i = 2; i <= s; ++i) {
    const int own = angles_in_row(i, rank);
    for (int j = 0; j < own; ++j) uc.push_back(theta[k++]);
    if (i > rank) {
      uc.push_back(eps);
      for (int j = rank + 1; j <= i - 1; ++j) uc.push_back(std::numbers::pi / 2);
    }
  }
  return uc;
}

}  // namespace mixgp
