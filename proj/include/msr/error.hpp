#pragma once

#include <stdexcept>
#include <string>

namespace msr {

// Root of the library's exception hierarchy. The CLI maps each subclass to
// an exit code (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or precondition on caller-chosen parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Tensor or array shapes that do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Non-finite or otherwise out-of-domain input values.
class ValueError : public Error {
public:
    using Error::Error;
};

// NaN/Inf arising during training or optimization.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

enum class ParseErrorKind {
    kEmpty,
    kBadMagic,
    kBadVersion,
    kBadRank,
    kTruncated,
    kTrailingBytes,
    kBadJson,
};

class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, const std::string& what)
        : Error(what), kind_(kind) {}

    [[nodiscard]] ParseErrorKind kind() const noexcept { return kind_; }

private:
    ParseErrorKind kind_;
};

}  // namespace msr
