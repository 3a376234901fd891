#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text; `pos` is a byte offset into the parsed region.
struct ParseError : OracleError {
    ParseError(const std::string& msg, std::size_t pos = 0)
        : OracleError(msg + " (at byte " + std::to_string(pos) + ")"), pos(pos) {}
    std::size_t pos;
};

struct ValidationError : OracleError {
    using OracleError::OracleError;
};

// No atom ordering exists in which each step introduces at most one new variable.
struct NoChainError : OracleError {
    NoChainError(const std::string& msg, std::vector<std::size_t> blocking_atoms)
        : OracleError(msg), blocking(std::move(blocking_atoms)) {}
    std::vector<std::size_t> blocking;
};

struct MissingSlotError : OracleError {
    explicit MissingSlotError(const std::string& slot_name)
        : OracleError("missing template slot: " + slot_name), slot(slot_name) {}
    std::string slot;
};

struct EmptyAnswerError : OracleError {
    using OracleError::OracleError;
};

struct MissingAnswerError : OracleError {
    explicit MissingAnswerError(int placeholder)
        : OracleError("no answer available for placeholder #" + std::to_string(placeholder)),
          index(placeholder) {}
    int index;
};

struct AuthError : OracleError {
    using OracleError::OracleError;
};

struct RateLimitError : OracleError {
    using OracleError::OracleError;
};

struct TransientError : OracleError {
    using OracleError::OracleError;
};

struct FixtureMissError : OracleError {
    explicit FixtureMissError(const std::string& request_digest)
        : OracleError("no fixture recorded for request digest " + request_digest),
          digest(request_digest) {}
    std::string digest;
};

struct FormatError : OracleError {
    using OracleError::OracleError;
};

struct InsufficientStratumError : OracleError {
    InsufficientStratumError(int stratum_key, std::size_t have, std::size_t need)
        : OracleError("stratum " + std::to_string(stratum_key) + " has " + std::to_string(have) +
                      " records, need " + std::to_string(need)),
          stratum(stratum_key) {}
    int stratum;
};

struct NoGoldError : OracleError {
    using OracleError::OracleError;
};

struct ConfigError : OracleError {
    using OracleError::OracleError;
};

}  // namespace oracle
