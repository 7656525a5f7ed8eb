#pragma once

#include <string_view>
#include <vector>

#include "crackmesh/domain/types.hpp"

namespace crackmesh {

/// One digest per line (LF or CRLF). Blank lines and surrounding whitespace
/// are skipped; the result is lowercase, deduplicated, in first-seen order.
/// Throws Error(kInvalidHash) carrying the 1-based line number.
std::vector<HexDigest> parse_hash_list(std::string_view raw, HashAlgorithm algorithm);

/// Order-preserving dedup.
std::vector<HexDigest> dedup_digests(const std::vector<HexDigest>& digests);

}  // namespace crackmesh
