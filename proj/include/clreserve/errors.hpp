#pragma once

#include <stdexcept>
#include <string>

namespace clreserve {

// Malformed or inconsistent input: bad triangles, config violations,
// schema mismatches. CLI maps this to exit code 1.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at runtime: divergent training loss, non-finite
// intermediate values. CLI maps this to exit code 2.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace clreserve
