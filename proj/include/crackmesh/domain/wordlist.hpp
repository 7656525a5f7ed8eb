#pragma once

#include <filesystem>
#include <vector>

#include "crackmesh/domain/types.hpp"

namespace crackmesh {

/// Candidate count of a wordlist file: LF-separated lines, a final line
/// without a trailing LF still counts. Throws Error(kFileUnreadable).
WordlistMeta scan_wordlist(const std::filesystem::path& path);

/// Every regular, non-empty file in `dir`, id = file stem, sorted by id.
std::vector<WordlistMeta> scan_wordlist_dir(const std::filesystem::path& dir);

}  // namespace crackmesh
