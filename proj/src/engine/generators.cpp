#include "crackmesh/engine/generators.hpp"

#include <limits>

#include "crackmesh/common/error.hpp"
#include "crackmesh/engine/keyspace.hpp"

namespace crackmesh::engine {
namespace {

constexpr std::uint64_t kBudgetChunk = std::uint64_t{1} << 62;

bool read_line(std::ifstream& in, std::string& out) {
  if (!std::getline(in, out)) return false;
  if (!out.empty() && out.back() == '\r') out.pop_back();
  return true;
}

std::string first_candidate(const distribution::KeyspaceRange& range) {
  if (range.start < 0 || range.end < range.start || range.end > keyspace_size(range.length)) {
    throw Error(ErrorCode::kIndexOutOfRange, "keyspace range outside keyspace", "keyspace");
  }
  if (range.start == range.end) return std::string(range.length, charset_byte(0));
  return index_to_candidate(range.length, range.start);
}

}  // namespace

BruteSource::BruteSource(const distribution::KeyspaceRange& range)
    : current_(first_candidate(range)), unfetched_(range.size()) {
  digits_.reserve(current_.size());
  for (char c : current_) digits_.push_back(static_cast<unsigned>(c - kCharsetFirst));
}

void BruteSource::refill() {
  if (unfetched_ > kBudgetChunk) {
    budget_ = kBudgetChunk;
    unfetched_ -= kBudgetChunk;
  } else {
    budget_ = unfetched_.convert_to<std::uint64_t>();
    unfetched_ = 0;
  }
}

bool BruteSource::next(std::string& out) {
  if (budget_ == 0) {
    if (unfetched_ == 0) return false;
    refill();
  }
  --budget_;
  out = current_;
  // odometer increment; wrapping past the last index is harmless because
  // the budget ends the stream first
  for (std::size_t pos = digits_.size(); pos-- > 0;) {
    if (++digits_[pos] < kCharsetSize) {
      current_[pos] = charset_byte(digits_[pos]);
      break;
    }
    digits_[pos] = 0;
    current_[pos] = charset_byte(0);
  }
  return true;
}

WordlistSource::WordlistSource(std::vector<std::filesystem::path> paths)
    : paths_(std::move(paths)) {}

bool WordlistSource::open_next() {
  if (next_path_ >= paths_.size()) return false;
  const auto& path = paths_[next_path_++];
  in_ = std::ifstream(path, std::ios::binary);
  if (!in_) throw Error(ErrorCode::kFileUnreadable, "cannot read wordlist " + path.string(), "wordlists");
  return true;
}

bool WordlistSource::next(std::string& out) {
  for (;;) {
    if (in_.is_open() && read_line(in_, out)) return true;
    if (in_.is_open() && in_.bad()) {
      throw Error(ErrorCode::kFileUnreadable, "read error in wordlist", "wordlists");
    }
    in_.close();
    if (!open_next()) return false;
  }
}

RuleSource::RuleSource(std::vector<std::filesystem::path> paths, std::vector<Rule> rules)
    : words_(std::move(paths)), rules_(std::move(rules)), rule_index_(rules_.size()) {}

bool RuleSource::next(std::string& out) {
  if (rules_.empty()) return false;
  if (rule_index_ == rules_.size()) {
    if (!words_.next(word_)) return false;
    rule_index_ = 0;
  }
  out = rules_[rule_index_++].apply(word_);
  return true;
}

CombinatorSource::CombinatorSource(const std::filesystem::path& left,
                                   const std::filesystem::path& right)
    : left_({left}) {
  WordlistSource r({right});
  std::string word;
  while (r.next(word)) right_.push_back(word);
  right_index_ = right_.size();
}

bool CombinatorSource::next(std::string& out) {
  if (right_.empty()) return false;
  if (right_index_ == right_.size()) {
    if (!left_.next(left_word_)) return false;
    right_index_ = 0;
  }
  out = left_word_;
  out += right_[right_index_++];
  return true;
}

std::vector<std::string> collect(CandidateSource& source) {
  std::vector<std::string> out;
  std::string c;
  while (source.next(c)) out.push_back(c);
  return out;
}

}  // namespace crackmesh::engine
