#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neurosym {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class InvalidConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed serialized input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateObservationError : public ParseError {
public:
    using ParseError::ParseError;
};

class EmptyAttentionError : public Error {
public:
    using Error::Error;
};

class DegenerateClusterError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(std::size_t epoch)
        : Error("non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace neurosym
