#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Syntax, unknown-identifier and nonlinearity errors from the constraint DSL.
// line/column are 1-based; column 0 means "whole line".
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column),
          detail_(message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

// CNF clause cap or resolvent budget exceeded.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class UnsatError : public Error {
public:
    using Error::Error;
};

// NaN or infinite input values.
class InvalidSample : public Error {
public:
    using Error::Error;
};

// The refiner found an empty feasible set for a coordinate under the runtime
// tolerance.
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& message, std::size_t position)
        : Error(message), position_(position) {}

    // Position of the offending variable in the compiled ordering.
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace drl
