#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msbench {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument passed to an operation (bad percentile, empty input, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Dataset discovery problems: missing root, no images at all.
class DatasetError : public Error {
public:
    using Error::Error;
};

/// Image decoding problems: unsupported format, truncated payload.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Backend failures: process death, protocol violations, bad outputs.
class BackendError : public Error {
public:
    using Error::Error;
};

/// Report writing failures (I/O, nothing to write).
class ReportError : public Error {
public:
    using Error::Error;
};

/// Text parsing failure carrying a 1-based line and column position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(what), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_ = 0;
    std::size_t column_ = 0;
};

} // namespace msbench
