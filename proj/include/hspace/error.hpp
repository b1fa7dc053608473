#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hspace {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), message_(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  /// Diagnostic without the offset suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t offset_;
};

/// Evaluation left the real domain of a function or produced NaN/inf.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that had to be inverted is (numerically) singular.
class SingularError : public Error {
 public:
  SingularError(const std::string& what, double det) : Error(what), det_(det) {}
  double det() const noexcept { return det_; }

 private:
  double det_;
};

/// Point too close to a locus where the metric formulas degenerate, or outside the chart.
class SingularLocusError : public Error {
 public:
  using Error::Error;
};

/// Spec file or spec content cannot be used (bad JSON, unknown keys, bad values).
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Sampling could not find enough admissible chart points.
class ExhaustionError : public Error {
 public:
  using Error::Error;
};

}  // namespace hspace
