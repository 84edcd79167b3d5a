#pragma once

#include <stdexcept>
#include <string>

namespace ccf {

// Error families map onto CLI exit codes: usage/config -> 1,
// data/format -> 2, numerical failure -> 3. Contract violations
// (bad shapes, bad arguments) throw std::invalid_argument and are
// treated as usage errors at the CLI boundary.

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file container (bad magic, version, truncation).
class FormatError : public DataError {
 public:
  explicit FormatError(const std::string& msg) : DataError(msg) {}
};

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at runtime (divergence, non-finite loss).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ccf
