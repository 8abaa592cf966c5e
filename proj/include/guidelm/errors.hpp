#pragma once

#include <stdexcept>
#include <string>

namespace guidelm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration; detected before any data is touched.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A value violates a domain invariant (bad record, bad request body).
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace guidelm
