#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crackmesh {

enum class ErrorCode {
  // domain
  kInvalidHash,
  kUnknownNode,
  kUnknownWordlist,
  kEmptyHashes,
  kModeConstraintViolated,
  kInvalidArgument,
  // distribution
  kEmptyInput,
  kInvalidPower,
  kNonPositiveRate,
  // engine
  kIndexOutOfRange,
  kRuleParse,
  kFileUnreadable,
  kBinaryMissing,
  kSpawnFailure,
  kParseFailure,
  // protocol
  kMalformedFrame,
  kUnknownType,
  kSchemaViolation,
  kVersionMismatch,
  // coordinator
  kNoEligibleNodes,
  kPowerUnknown,
  kUnknownJob,
  kUnknownUser,
  kForbidden,
  kUnauthorized,
  kConflict,
  kStorage,
  // api
  kBadRequest,
  kNotFound,
  kMethodNotAllowed,
  // net
  kNetwork,
};

/// Stable snake_case name used in API error bodies and protocol error
/// messages.
std::string_view error_code_name(ErrorCode code);

/// The single exception type thrown across module boundaries. `field()`
/// names the offending input when one exists (a JSON key, a CLI flag, a
/// request field); `line()` is set for line-oriented parse errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {},
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(std::move(message)),
        code_(code),
        field_(std::move(field)),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string field_;
  std::optional<std::size_t> line_;
};

}  // namespace crackmesh
