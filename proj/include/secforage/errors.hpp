#pragma once

#include <stdexcept>
#include <string>

namespace secforage {

/// Invalid configuration (bad dimensions, unknown keys, out-of-range values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation invoked in a state where it is not allowed, e.g. stepping a
/// finished episode.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Caller broke a precondition (length mismatch, bad index).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed, truncated or inconsistent result file, or an I/O failure.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace secforage
