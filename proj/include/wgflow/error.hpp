#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wgf {

/// Caller handed in something malformed: wrong shape, bad hyperparameter, unparseable file.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A text input could not be parsed. Row and column are 1-based; 0 means not applicable.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : InputError(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// A computation produced (or was about to consume) a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API precondition was violated by the caller (stale cache, out-of-range coefficient).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative solver ran out of iterations. Carries the last residual.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericError(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace wgf
