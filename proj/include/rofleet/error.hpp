#pragma once

#include <stdexcept>
#include <string>

namespace rofleet {

// Base of everything the library throws. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameter or configuration value (exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Input data violates a precondition: too short, empty, malformed (exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

// A numerical procedure could not produce a result (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace rofleet
