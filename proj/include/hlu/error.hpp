#pragma once

#include <stdexcept>
#include <string>

namespace hlu {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input (Matrix Market header or entries, generator specs).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input that is well formed but not supported (complex, pattern, array ...).
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A pivot block could not be factorized.
class SingularPivot : public Error {
public:
    explicit SingularPivot(const std::string& what, std::string node = {})
        : Error(node.empty() ? what : what + " at node " + node), node_(std::move(node)) {}

    const std::string& node() const noexcept { return node_; }

private:
    std::string node_;
};

/// One-sided Jacobi failed to converge within its sweep budget.
class SvdNoConvergence : public Error {
public:
    using Error::Error;
};

}  // namespace hlu
