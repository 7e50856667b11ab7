#pragma once

#include <stdexcept>
#include <string>

namespace phaseclf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or usage: missing/unknown keys, wrong types, bad flags.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Problems with input data: unreadable files, malformed rows, bad values.
class DataError : public Error {
public:
    using Error::Error;
};

/// Contract violation on numeric inputs (shape mismatch, index out of range, non-finite values).
class NumericError : public Error {
public:
    using Error::Error;
};

// Model container errors. Each failure mode has its own type so callers can tell them apart.
class FormatError : public Error {
public:
    using Error::Error;
};
class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};
class TruncatedPayloadError : public FormatError {
public:
    using FormatError::FormatError;
};
class NonFiniteValueError : public FormatError {
public:
    using FormatError::FormatError;
};
class VocabularyMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace phaseclf
