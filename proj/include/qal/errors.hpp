// Error types shared across the library. Precondition violations on sizes,
// shapes and indices use the std exceptions directly (std::invalid_argument,
// std::out_of_range); the classes here carry extra context that callers or
// tests need to inspect.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace qal {

// A computed quantity violated an internal consistency bound, e.g. a value
// that must be real carries a large imaginary residue, or a predictive
// variance is negative beyond rounding.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Cholesky factorization hit a non-positive pivot.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double pivot)
        : std::runtime_error(what), pivot_(pivot) {}
    double pivot() const { return pivot_; }

private:
    double pivot_;
};

// Two atoms coincide, so a pairwise term is undefined.
class DegenerateGeometryError : public std::runtime_error {
public:
    explicit DegenerateGeometryError(const std::string& what)
        : std::runtime_error(what) {}
};

// An external energy command failed; carries whatever it wrote to stderr.
class OracleError : public std::runtime_error {
public:
    explicit OracleError(const std::string& what, std::string stderr_text = {})
        : std::runtime_error(what), stderr_(std::move(stderr_text)) {}
    const std::string& stderr_text() const { return stderr_; }

private:
    std::string stderr_;
};

// A table oracle was asked for an id it does not contain.
class MissingRecordError : public std::runtime_error {
public:
    explicit MissingRecordError(const std::string& what)
        : std::runtime_error(what) {}
};

// Malformed text input; line is 1-based, 0 when not line-addressable.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Same id appears twice in an energy table.
class DuplicateRecordError : public ParseError {
public:
    DuplicateRecordError(const std::string& what, std::size_t line)
        : ParseError(what, line) {}
};

// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qal
