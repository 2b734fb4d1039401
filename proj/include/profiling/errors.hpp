#pragma once

#include <stdexcept>
#include <string>

namespace profiling {

/// Input that violates a contract: unknown facets, bad shapes, malformed records.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input record that could not be parsed; line() is 1-based, 0 when not line-oriented.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line)
        : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    explicit ParseError(const std::string& what) : ParseError(what, 0) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyInputError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Tensor dimension mismatch; carries the expected and actual sizes.
class ShapeError : public ValidationError {
public:
    ShapeError(const std::string& where, std::size_t expected, std::size_t actual)
        : ValidationError(where + ": expected dimension " + std::to_string(expected) + ", got " +
                          std::to_string(actual)),
          expected_(expected), actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

/// File system or stream failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A persisted artifact that is structurally unreadable.
class FormatError : public IoError {
public:
    using IoError::IoError;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Artifact was produced against a different facet schema.
class FingerprintMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A computation produced NaN or infinity.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace profiling
