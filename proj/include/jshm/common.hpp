#pragma once

#include <stdexcept>
#include <string>

namespace jshm {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid user input: bad config values, malformed files, inconsistent sizes.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: indefinite mass matrix, non-converged eigensolve, ...
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jshm
