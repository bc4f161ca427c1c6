#pragma once

#include <stdexcept>
#include <string>

namespace mtr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files, schema mismatches, bad target designations.
class DataError : public Error {
public:
    using Error::Error;
};

/// Shape or dimension mismatch between arguments.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or argument value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Model file could not be read or written.
class SerializationError : public Error {
public:
    using Error::Error;
};

}  // namespace mtr
