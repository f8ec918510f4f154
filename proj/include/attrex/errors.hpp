#pragma once

#include <stdexcept>
#include <string>

namespace attrex {

// Bad command-line usage. The CLI maps this to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed input data. The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss or other numerical failure. The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace attrex
