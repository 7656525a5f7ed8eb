#include "crackmesh/domain/hash_list.hpp"

#include <string>
#include <unordered_set>

#include "crackmesh/common/error.hpp"

namespace crackmesh {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<HexDigest> parse_hash_list(std::string_view raw, HashAlgorithm algorithm) {
  std::vector<HexDigest> out;
  std::unordered_set<HexDigest> seen;
  std::size_t line_no = 0;
  while (!raw.empty()) {
    ++line_no;
    auto nl = raw.find('\n');
    auto line = trim(raw.substr(0, nl));
    raw = nl == std::string_view::npos ? std::string_view{} : raw.substr(nl + 1);
    if (line.empty()) continue;
    auto digest = HexDigest::parse(line, algorithm);
    if (!digest) {
      throw Error(ErrorCode::kInvalidHash,
                  "line " + std::to_string(line_no) + ": not a valid " +
                      std::string(algorithm_name(algorithm)) + " digest",
                  "hashes", line_no);
    }
    if (seen.insert(*digest).second) out.push_back(std::move(*digest));
  }
  return out;
}

std::vector<HexDigest> dedup_digests(const std::vector<HexDigest>& digests) {
  std::vector<HexDigest> out;
  std::unordered_set<HexDigest> seen;
  for (const auto& d : digests) {
    if (seen.insert(d).second) out.push_back(d);
  }
  return out;
}

}  // namespace crackmesh
