#pragma once

#include <stdexcept>
#include <string>

namespace eulab {

// Requested derivative order outside what the model (or the API cap) supports.
class UnsupportedOrderError : public std::invalid_argument {
 public:
  explicit UnsupportedOrderError(const std::string& what) : std::invalid_argument(what) {}
};

// A matrix that must be positive definite fails the eigenvalue floor.
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

// Configuration or input files that fail validation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical preconditions violated at run time (resolution, truncation, caps).
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eulab
