#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qrelkit {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or parameters (CLI exit code 1).
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public Error {
  public:
    using Error::Error;

    static DataError at(std::string const& path, std::size_t line, std::string const& what)
    {
        return DataError(path + ":" + std::to_string(line) + ": " + what);
    }
};

/// A statistic that is mathematically undefined for the given input.
class UndefinedStatistic : public Error {
  public:
    using Error::Error;
};

}  // namespace qrelkit
