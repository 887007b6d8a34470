#pragma once

#include <stdexcept>
#include <string>

namespace quasispec {

/// Raised when caller-supplied parameters violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation cannot produce a trustworthy number
/// (escaped orbit, exceeded caps, non-finite intermediate).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace quasispec
