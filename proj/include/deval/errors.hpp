#pragma once

#include <stdexcept>
#include <string>

namespace deval {

// Base of every error this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input syntax (JSON, CSV, PNG framing).
class ParseError : public Error {
public:
    using Error::Error;
};

// Syntactically fine but violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Rendering failed, typically an unresolvable asset.
class RenderError : public Error {
public:
    using Error::Error;
};

// Filesystem trouble.
class IoError : public Error {
public:
    using Error::Error;
};

// Undefined statistic (constant series, empty region, zero-area rect).
class StatsError : public Error {
public:
    using Error::Error;
};

// Provider / judge failure after retries.
class LlmError : public Error {
public:
    using Error::Error;
};

// The configured request budget would be exceeded; callers stop cleanly.
class BudgetError : public Error {
public:
    using Error::Error;
};

} // namespace deval
