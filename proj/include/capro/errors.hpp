#pragma once

#include <stdexcept>
#include <string>

namespace capro {

// Bad input: malformed documents, violated invariants, out-of-range ids.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The problem itself is unsolvable: disconnected endpoints, infeasible residual.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric breakdown: solver cycling, iteration caps, search caps exceeded.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace capro
