#pragma once

#include <stdexcept>
#include <string>

namespace fclass {

/// Bad inputs: malformed files, out-of-range options, contract violations.
/// The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failures: factorization breakdowns, divergent chains,
/// degenerate estimates. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fclass
