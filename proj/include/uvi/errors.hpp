#pragma once

#include <stdexcept>
#include <string>

namespace uvi {

/// Unusable configuration or I/O: missing files, bad JSON, invalid options,
/// unwritable output directories. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Content that violates the data contract: malformed rows, duplicate keys,
/// out-of-range values, violated algorithm preconditions. Exit code 1.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace uvi
