#pragma once

#include <stdexcept>
#include <string>

namespace boxpose {

/// Malformed or inconsistent input: schema violations, shape mismatches,
/// files that do not follow the documented formats.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure: missing files, short reads, write failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Geometric or numerical failure: points behind the camera, degenerate
/// configurations, constraints that cannot be satisfied.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace boxpose
