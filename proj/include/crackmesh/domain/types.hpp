#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crackmesh/common/bigint.hpp"
#include "crackmesh/common/time.hpp"

namespace crackmesh {

using NodeId = std::string;
using WordlistId = std::string;
using JobId = std::uint64_t;
using TaskId = std::uint64_t;
using UserId = std::uint64_t;

enum class HashAlgorithm { kMd5, kSha1, kSha256 };

inline constexpr HashAlgorithm kAllAlgorithms[] = {HashAlgorithm::kMd5, HashAlgorithm::kSha1,
                                                   HashAlgorithm::kSha256};

/// 32 / 40 / 64.
std::size_t digest_hex_length(HashAlgorithm algorithm) noexcept;
std::string_view algorithm_name(HashAlgorithm algorithm) noexcept;
std::optional<HashAlgorithm> parse_algorithm(std::string_view name) noexcept;

/// A lowercase hex digest. Construction goes through `parse`, so every
/// instance has already been length- and charset-checked for some algorithm.
class HexDigest {
 public:
  HexDigest() = default;

  static std::optional<HexDigest> parse(std::string_view text, HashAlgorithm algorithm);

  const std::string& str() const noexcept { return hex_; }
  std::size_t size() const noexcept { return hex_.size(); }

  friend bool operator==(const HexDigest&, const HexDigest&) = default;
  friend auto operator<=>(const HexDigest&, const HexDigest&) = default;

 private:
  explicit HexDigest(std::string hex) : hex_(std::move(hex)) {}
  std::string hex_;
};

struct BruteForce {
  unsigned min_len = 1;
  unsigned max_len = 1;
  friend bool operator==(const BruteForce&, const BruteForce&) = default;
};

struct Dictionary {
  std::vector<WordlistId> wordlists;
  friend bool operator==(const Dictionary&, const Dictionary&) = default;
};

struct RuleBased {
  std::vector<WordlistId> wordlists;
  std::vector<std::string> rules;
  friend bool operator==(const RuleBased&, const RuleBased&) = default;
};

struct Combinator {
  WordlistId left;
  WordlistId right;
  friend bool operator==(const Combinator&, const Combinator&) = default;
};

using AttackMode = std::variant<BruteForce, Dictionary, RuleBased, Combinator>;

/// "brute" | "dictionary" | "rules" | "combinator"
std::string_view mode_name(const AttackMode& mode) noexcept;

/// Every wordlist a mode references, in declaration order (duplicates kept).
std::vector<WordlistId> referenced_wordlists(const AttackMode& mode);

enum class JobStatus { kCreated, kDistributing, kRunning, kCompleted, kFailed };

std::string_view job_status_name(JobStatus status) noexcept;
std::optional<JobStatus> parse_job_status(std::string_view name) noexcept;
bool is_terminal(JobStatus status) noexcept;

/// True only for the forward edges Created→Distributing→Running→{Completed,Failed}.
bool can_transition(JobStatus from, JobStatus to) noexcept;

struct Job {
  JobId id = 0;
  UserId owner = 0;
  HashAlgorithm algorithm = HashAlgorithm::kMd5;
  AttackMode mode;
  std::vector<HexDigest> hashes;
  std::vector<NodeId> requested_nodes;
  JobStatus status = JobStatus::kCreated;
  TimestampMs created_at = 0;
  std::optional<TimestampMs> finished_at;
  /// Set when the job failed after some results were already recovered.
  bool partial_results = false;

  /// Moves along the status machine; throws Error(kInvalidArgument) on an
  /// illegal edge.
  void advance(JobStatus to);
};

enum class EngineKind { kBuiltin, kExternal };

std::string_view engine_kind_name(EngineKind kind) noexcept;
std::optional<EngineKind> parse_engine_kind(std::string_view name) noexcept;

struct NodeProfile {
  NodeId node_id;
  std::string agent_name;
  std::string os;
  std::string arch;
  EngineKind engine_kind = EngineKind::kBuiltin;
  std::map<HashAlgorithm, double> power;
  bool connected = false;
  TimestampMs last_seen = 0;
};

struct HashSlice {
  std::vector<HexDigest> hashes;
  friend bool operator==(const HashSlice&, const HashSlice&) = default;
};

struct WordlistSlice {
  std::vector<HexDigest> hashes;
  std::vector<WordlistId> wordlists;
  friend bool operator==(const WordlistSlice&, const WordlistSlice&) = default;
};

struct KeyspaceSlice {
  std::vector<HexDigest> hashes;
  BigInt start;
  BigInt end;
  unsigned length = 1;
  friend bool operator==(const KeyspaceSlice&, const KeyspaceSlice&) = default;
};

using TaskPayload = std::variant<HashSlice, WordlistSlice, KeyspaceSlice>;

const std::vector<HexDigest>& payload_hashes(const TaskPayload& payload);
std::vector<HexDigest>& payload_hashes(TaskPayload& payload);

enum class TaskStatus { kPending, kSent, kRunning, kExhausted, kDone, kFailed, kLost };

std::string_view task_status_name(TaskStatus status) noexcept;
std::optional<TaskStatus> parse_task_status(std::string_view name) noexcept;
bool is_terminal(TaskStatus status) noexcept;

struct TaskAssignment {
  TaskId task_id = 0;
  JobId job_id = 0;
  NodeId node_id;
  TaskPayload payload;
  TaskStatus status = TaskStatus::kPending;
  /// Brute-force jobs run one wave per password length; other modes use 0.
  unsigned wave = 0;
  /// The Lost task this one was replanned from.
  std::optional<TaskId> replaces;
  std::uint64_t tried = 0;
  double speed_hps = 0.0;
};

struct CrackedResult {
  JobId job_id = 0;
  HexDigest hash;
  std::string plaintext;  // raw bytes
  NodeId node_id;
  TimestampMs at = 0;
};

struct WordlistMeta {
  WordlistId id;
  std::string path;
  std::uint64_t line_count = 0;
  std::uint64_t byte_size = 0;
};

}  // namespace crackmesh

template <>
struct std::hash<crackmesh::HexDigest> {
  std::size_t operator()(const crackmesh::HexDigest& d) const noexcept {
    return std::hash<std::string>{}(d.str());
  }
};
