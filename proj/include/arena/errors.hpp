#pragma once

#include <stdexcept>
#include <string>

namespace arena {

// A documented precondition was broken by the caller (bad index, bad range).
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// API called out of order, e.g. stepping a finished episode.
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A line matched the execution pattern but names an unregistered operation.
struct UnknownOpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truth value requested for a link with zero total evidence.
struct NoEvidenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedEnvironment : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpawnError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BrokenSessionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The dynamic-programming solver failed to converge.
struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace arena
