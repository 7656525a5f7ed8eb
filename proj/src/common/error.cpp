#include "crackmesh/common/error.hpp"

namespace crackmesh {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidHash: return "invalid_hash";
    case ErrorCode::kUnknownNode: return "unknown_node";
    case ErrorCode::kUnknownWordlist: return "unknown_wordlist";
    case ErrorCode::kEmptyHashes: return "empty_hashes";
    case ErrorCode::kModeConstraintViolated: return "mode_constraint_violated";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kInvalidPower: return "invalid_power";
    case ErrorCode::kNonPositiveRate: return "non_positive_rate";
    case ErrorCode::kIndexOutOfRange: return "index_out_of_range";
    case ErrorCode::kRuleParse: return "rule_parse_error";
    case ErrorCode::kFileUnreadable: return "file_unreadable";
    case ErrorCode::kBinaryMissing: return "binary_missing";
    case ErrorCode::kSpawnFailure: return "spawn_failure";
    case ErrorCode::kParseFailure: return "parse_failure";
    case ErrorCode::kMalformedFrame: return "malformed_frame";
    case ErrorCode::kUnknownType: return "unknown_type";
    case ErrorCode::kSchemaViolation: return "schema_violation";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kNoEligibleNodes: return "no_eligible_nodes";
    case ErrorCode::kPowerUnknown: return "power_unknown";
    case ErrorCode::kUnknownJob: return "unknown_job";
    case ErrorCode::kUnknownUser: return "unknown_user";
    case ErrorCode::kForbidden: return "forbidden";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kStorage: return "storage_error";
    case ErrorCode::kBadRequest: return "bad_request";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kMethodNotAllowed: return "method_not_allowed";
    case ErrorCode::kNetwork: return "network_error";
  }
  return "unknown";
}

}  // namespace crackmesh
