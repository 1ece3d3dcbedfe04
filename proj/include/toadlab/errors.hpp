#pragma once

#include <stdexcept>
#include <string>

namespace toadlab {

// Numerical failure (non-convergence, NaN, lost monotonicity).
// CLI maps these to exit code 2.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad or inconsistent configuration. CLI maps these to exit code 2 as well,
// after printing the offending key.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace toadlab
