#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

/// Caller passed inconsistent arguments (context mismatch, bad literal, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A statistic needed a translate outside the available window.
class BoundaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical hypothesis of an operation does not hold for the input
/// (freeness fails, witness out of range, search cap exceeded, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ergolab
