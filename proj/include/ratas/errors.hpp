#pragma once

#include <stdexcept>
#include <string>

namespace ratas {

/// Base class for all library errors. The CLI maps subclasses onto its
/// exit-code contract (1 input, 2 backend, 3 internal).
class RatasError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document: wrong structure, wrong field type.
class ParseError : public RatasError {
public:
    using RatasError::RatasError;
};

/// Document violates the file schema (missing essential field, unknown
/// field in strict mode).
class SchemaError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Parsed data violates a domain invariant (duplicate ids, out-of-range
/// scores, bad score-source sums).
class ValidationError : public RatasError {
public:
    using RatasError::RatasError;
};

/// Terminal model-call failure after the retry budget is exhausted, or a
/// non-retryable backend condition. Carries the attempt count.
class GatewayError : public RatasError {
public:
    GatewayError(const std::string& what, int attempts_made = 1)
        : RatasError(what), attempts(attempts_made) {}

    int attempts;
};

/// Internal state violates a structural invariant; indicates a bug or a
/// hand-edited document that slipped past load checks.
class InvariantError : public RatasError {
public:
    using RatasError::RatasError;
};

} // namespace ratas
