#pragma once

#include <stdexcept>
#include <string>

namespace hypermaps {

/// Bad arguments, configuration or broken preconditions. The CLI maps this to
/// exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable, missing or malformed input data. The CLI maps this to exit
/// code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hypermaps
