#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bajmean {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation outside the domain of an operation (ln of a nonpositive
/// number, division by zero, overflow, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Jets requested at a piecewise breakpoint.
class BreakpointError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A derivative that must not vanish did.
class VanishingDerivativeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative solver ran out of iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent construction data: a weight that is not positive, a generator
/// that is not monotone in the declared direction, a degenerate Möbius map.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace bajmean
