#include "crackmesh/domain/wordlist.hpp"

#include <algorithm>
#include <fstream>

#include "crackmesh/common/error.hpp"

namespace crackmesh {

WordlistMeta scan_wordlist(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot open " + path.string(), "path");
  WordlistMeta meta;
  meta.id = path.stem().string();
  meta.path = path.string();
  char buf[1 << 16];
  char last = '\n';
  while (in) {
    in.read(buf, sizeof buf);
    auto n = in.gcount();
    if (n <= 0) break;
    meta.byte_size += static_cast<std::uint64_t>(n);
    meta.line_count += static_cast<std::uint64_t>(std::count(buf, buf + n, '\n'));
    last = buf[n - 1];
  }
  if (last != '\n') ++meta.line_count;
  return meta;
}

std::vector<WordlistMeta> scan_wordlist_dir(const std::filesystem::path& dir) {
  std::vector<WordlistMeta> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    auto meta = scan_wordlist(entry.path());
    if (meta.line_count == 0) continue;
    out.push_back(std::move(meta));
  }
  if (ec) throw Error(ErrorCode::kFileUnreadable, "cannot list " + dir.string(), "wordlist_dir");
  std::sort(out.begin(), out.end(),
            [](const WordlistMeta& a, const WordlistMeta& b) { return a.id < b.id; });
  return out;
}

}  // namespace crackmesh
