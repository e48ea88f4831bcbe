#pragma once

#include <stdexcept>
#include <string>

namespace schurode {

/// Shape or size mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The QR iteration exhausted its budget before deflating every eigenvalue.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, int converged)
        : std::runtime_error(what), converged_eigenvalues(converged) {}
    int converged_eigenvalues;
};

/// A requested object exceeds a configured size cap.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, long long requested, long long cap)
        : std::runtime_error(what), requested(requested), cap(cap) {}
    long long requested;
    long long cap;
};

/// A numerical integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double abscissa)
        : std::runtime_error(what), abscissa(abscissa) {}
    double abscissa;
};

/// A quadrature rule cannot resolve the requested integrand exactly.
class UnderResolutionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// System-definition text could not be parsed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what),
          line(line),
          column(column) {}
    int line;
    int column;
};

}  // namespace schurode
