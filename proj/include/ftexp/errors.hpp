#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ftexp {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: malformed files, invalid series, shape mismatches.
// The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

// Numerical failure on otherwise valid input. The CLI maps these to exit code 1.
class NumericError : public Error {
public:
    using Error::Error;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

class ValidationError : public InputError {
public:
    ValidationError(std::size_t index, const std::string& what)
        : InputError("invalid sample at index " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class TooShortError : public InputError {
public:
    using InputError::InputError;
};

class DuplicateAbscissaError : public InputError {
public:
    using InputError::InputError;
};

class DimensionMismatchError : public InputError {
public:
    using InputError::InputError;
};

class InsufficientDataError : public InputError {
public:
    using InputError::InputError;
};

class IoError : public InputError {
public:
    using InputError::InputError;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public InputError {
public:
    using InputError::InputError;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericError(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class SingularMatrixError : public NumericError {
public:
    using NumericError::NumericError;
};

class OverflowError : public NumericError {
public:
    using NumericError::NumericError;
};

class RootAtZeroError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConjugateClosureError : public NumericError {
public:
    using NumericError::NumericError;
};

// Exact interpolation missed its residual tolerance.
class InterpolationError : public NumericError {
public:
    InterpolationError(const std::string& what, double residual)
        : NumericError(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace ftexp
