#pragma once

#include <stdexcept>
#include <string>

namespace fracfit {

/// Gamma evaluated at zero or a negative integer.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// A series (inner Mittag-Leffler or outer step-response sum) that did not
/// converge in working precision. Carries the last partial sum.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double partial_sum)
        : std::runtime_error(what), partial_sum_(partial_sum) {}

    double partial_sum() const noexcept { return partial_sum_; }

private:
    double partial_sum_;
};

class GridTooCoarseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Divergence guard tripped during time integration.
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for every problem with input data (files, traces, alignment).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public DataError {
public:
    using DataError::DataError;
};

class MonotonicityError : public DataError {
public:
    using DataError::DataError;
};

class NormalizationError : public DataError {
public:
    using DataError::DataError;
};

class GridMismatchError : public DataError {
public:
    using DataError::DataError;
};

class ExtrapolationError : public DataError {
public:
    using DataError::DataError;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every particle ended at the failure sentinel.
class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fracfit
