#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace microgeo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A corpus line that could not be turned into a record.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Normalizing a grid whose total is zero.
class EmptyDistributionError : public Error {
public:
    using Error::Error;
};

/// Two grids that should share a GridSpec do not.
class SpecMismatchError : public Error {
public:
    using Error::Error;
};

/// Pearson / regression on data with zero variance in one coordinate.
class UndefinedCorrelationError : public Error {
public:
    using Error::Error;
};

/// Angle histogram over grids with no occupied bin.
class NoDataError : public Error {
public:
    using Error::Error;
};

/// Invalid values in a config, scenario, style, or argument.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Unreadable input or unwritable output.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace microgeo
