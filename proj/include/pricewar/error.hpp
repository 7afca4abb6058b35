#pragma once

#include <stdexcept>
#include <string>

namespace pricewar {

/// Invalid configuration values or malformed config files. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad input data: invalid records, unparseable files, unsatisfiable imputation.
/// Maps to CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal inconsistency detected at run time (e.g. negative Gibbs counts).
class StateError : public std::runtime_error {
public:
    explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pricewar
