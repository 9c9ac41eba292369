#pragma once

#include <stdexcept>
#include <string>

namespace dcfl {

// Shape/contract violations: bad dimensions, empty inputs, malformed files.
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values encountered during numeric work.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dcfl
