#pragma once

#include <stdexcept>
#include <string>

namespace zsinfer {

// Raised for malformed or inconsistent run configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for unreadable, malformed, or invariant-violating data. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zsinfer
