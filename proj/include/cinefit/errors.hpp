#pragma once

#include <stdexcept>
#include <string>

namespace cinefit {

// Raised when a loss or metric turns non-finite; the CLI maps this to exit code 2.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised on malformed config files / unknown keys; the CLI maps this to exit code 1.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check_arg(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline void check_dim(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("dimension error: " + msg);
}

}  // namespace cinefit
