#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mixgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value lies outside the domain of the operation (c outside (0,1), bad bounds, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Wrong number of parameters or mismatched dimensions.
class ArityError : public Error {
 public:
  using Error::Error;
};

/// LRC rank outside 2..s-1.
class RankError : public Error {
 public:
  using Error::Error;
};

/// A correlation matrix stayed indefinite after nugget regularization.
class NumericalRankError : public Error {
 public:
  NumericalRankError(const std::string& what, double smallest_eigenvalue)
      : Error(what), smallest_eigenvalue_(smallest_eigenvalue) {}
  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

/// Cholesky of the n x n model correlation matrix failed.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// Every optimizer start failed; one diagnostic line per start.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& what, std::vector<std::string> diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Unknown name in a registry.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Slice or level index out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A goodness-of-fit criterion is undefined for the input (e.g. constant truth).
class UndefinedCriterion : public Error {
 public:
  using Error::Error;
};

/// The object lacks a component the operation requires.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or config content.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixgp
