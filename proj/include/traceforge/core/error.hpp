#pragma once

#include <stdexcept>
#include <string>

namespace traceforge {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A commit hash, issue key, batch id or similar was not found.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Archive or store contents violate a structural invariant.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Input data cannot be used for the requested operation
/// (single-class training data, empty corpus, too few issues...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Malformed external input (export files, JSON bodies, timestamps).
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace traceforge
