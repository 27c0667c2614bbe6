#pragma once

#include <stdexcept>
#include <string>

namespace netobj {

/// Raised when an input file (manifest, matrix) cannot be parsed or fails
/// validation. The message names the offending file and cell.
class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine cannot produce a usable result
/// (eigen-solver failure, degenerate histogram, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netobj
