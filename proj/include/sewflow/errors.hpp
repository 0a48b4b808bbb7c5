#pragma once

#include <stdexcept>
#include <string>

namespace sewflow {

/// Precondition or argument-domain violation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested operation needs structure the state space does not have.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Not enough usable data points for a statistical fit.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable, or not in the expected format.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sewflow
