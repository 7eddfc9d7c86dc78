#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ddrbench {

enum class ErrorCode {
  kDimensionMismatch,
  kZeroNorm,
  kNonFinite,
  kLengthMismatch,
  kEmptyInput,
  kIndexOutOfRange,
  kInvalidArgument,
  kUndefined,             // e.g. DDR with identical pre sequences, zero variance
  kDegenerate,            // e.g. DDR with vanishing output distance
  kInsufficientCoverage,  // lexicon cannot supply enough synonyms
  kIo,
  kFormat,                // corrupt or unreadable file contents
  kVersionMismatch,
  kTransport,             // retryable provider failure
  kMalformedResponse,     // provider answered, but not per protocol
  kProviderInconsistency, // provider answered with self-contradictory shapes
  kNotFound,
  kHashMismatch,
  kConfig,
  kInternal,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported as `Error`; `code()` lets callers
/// (the CLI in particular) classify them without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string const& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string const& message) {
  throw Error(code, message);
}

}  // namespace ddrbench
