#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "crackmesh/distribution/distribution.hpp"
#include "crackmesh/engine/rules.hpp"

namespace crackmesh::engine {

/// Pull-style candidate stream. `next` overwrites `out` and returns false
/// once the stream is exhausted.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  virtual bool next(std::string& out) = 0;
};

/// Ascending base-95 enumeration of a keyspace range.
class BruteSource final : public CandidateSource {
 public:
  explicit BruteSource(const distribution::KeyspaceRange& range);
  bool next(std::string& out) override;

 private:
  void refill();

  std::string current_;
  std::vector<unsigned> digits_;
  BigInt unfetched_;
  std::uint64_t budget_ = 0;
};

/// Lines of each file in order, LF-separated with a trailing CR stripped.
class WordlistSource final : public CandidateSource {
 public:
  explicit WordlistSource(std::vector<std::filesystem::path> paths);
  bool next(std::string& out) override;

 private:
  bool open_next();

  std::vector<std::filesystem::path> paths_;
  std::size_t next_path_ = 0;
  std::ifstream in_;
};

/// Word-major: every rule applied to word 1, then word 2, ...
class RuleSource final : public CandidateSource {
 public:
  RuleSource(std::vector<std::filesystem::path> paths, std::vector<Rule> rules);
  bool next(std::string& out) override;

 private:
  WordlistSource words_;
  std::vector<Rule> rules_;
  std::string word_;
  std::size_t rule_index_;
};

/// left_word + right_word, left outer, right inner. The right list is
/// held in memory.
class CombinatorSource final : public CandidateSource {
 public:
  CombinatorSource(const std::filesystem::path& left, const std::filesystem::path& right);
  bool next(std::string& out) override;

 private:
  WordlistSource left_;
  std::vector<std::string> right_;
  std::string left_word_;
  std::size_t right_index_;
};

/// Drains a source; test and tooling helper.
std::vector<std::string> collect(CandidateSource& source);

}  // namespace crackmesh::engine
