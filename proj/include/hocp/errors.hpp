#pragma once

#include <stdexcept>
#include <string>

namespace hocp {

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation gets an argument outside its precondition.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The polynomial handed to the root finder is identically zero.
struct zero_polynomial_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// A cut was inserted at (numerically) the same center as an existing one.
struct duplicate_center_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw precondition_error(what);
}

}  // namespace hocp
