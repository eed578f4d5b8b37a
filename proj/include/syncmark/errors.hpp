#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace syncmark {

// Base class for every failure the library reports.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- model ---------------------------------------------------------------

// The requested correlation structure admits no joint law (latent matrix
// not positive semidefinite, or inconsistent degenerate entries).
class InfeasibleCorrelation : public Error {
public:
    using Error::Error;
};

// Explicit joint distributions are capped at 20 securities (2^n atoms).
class DimensionTooLarge : public Error {
public:
    using Error::Error;
};

// A Bayesian update produced a zero normalization constant.
class DegenerateBelief : public Error {
public:
    using Error::Error;
};

// -- simulation ----------------------------------------------------------

// Exhaustive enumeration is capped at 6 securities.
class TooLargeForExact : public Error {
public:
    using Error::Error;
};

// -- analytics -----------------------------------------------------------

class EmptyInput : public Error {
public:
    using Error::Error;
};

// Response-curve plateau is non-positive; the curve cannot be normalized.
class DegenerateNormalization : public Error {
public:
    using Error::Error;
};

// Too few conditioning events to estimate a response curve.
class InsufficientEvents : public Error {
public:
    using Error::Error;
};

// Too few jointly observed grid cells for a correlation.
class InsufficientOverlap : public Error {
public:
    using Error::Error;
};

// A series is constant where a variance is needed.
class DivisionByZero : public Error {
public:
    using Error::Error;
};

// -- io ------------------------------------------------------------------

class ParseError : public Error {
public:
    using Error::Error;
};

// Invariant violation, annotated with the offending field path.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& msg)
        : Error(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Malformed record in a tick/table file, annotated with the 1-based line.
class SchemaError : public Error {
public:
    SchemaError(std::size_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace syncmark
