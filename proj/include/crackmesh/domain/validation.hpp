#pragma once

#include <span>
#include <vector>

#include "crackmesh/domain/types.hpp"

namespace crackmesh {

struct JobRequest {
  UserId owner = 0;
  HashAlgorithm algorithm = HashAlgorithm::kMd5;
  AttackMode mode;
  std::vector<HexDigest> hashes;
  std::vector<NodeId> requested_nodes;
};

struct ValidationLimits {
  /// Brute-force safety cap on password length.
  unsigned max_brute_length = 6;
};

/// Checks mode invariants only. Throws Error(kModeConstraintViolated).
void validate_attack_mode(const AttackMode& mode, const ValidationLimits& limits = {});

/// Gate before planning: every requested node must be registered and
/// connected, every referenced wordlist registered, hashes non-empty.
/// Returns a Created job with deduplicated hashes; `id` and `created_at`
/// are left for the caller to assign.
Job validate_job(const JobRequest& request, std::span<const NodeProfile> registry,
                 std::span<const WordlistMeta> wordlists, const ValidationLimits& limits = {});

}  // namespace crackmesh
