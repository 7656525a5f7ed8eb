#include "crackmesh/domain/types.hpp"

#include <algorithm>

#include "crackmesh/common/error.hpp"
#include "crackmesh/common/hex.hpp"

namespace crackmesh {

std::size_t digest_hex_length(HashAlgorithm algorithm) noexcept {
  switch (algorithm) {
    case HashAlgorithm::kMd5: return 32;
    case HashAlgorithm::kSha1: return 40;
    case HashAlgorithm::kSha256: return 64;
  }
  return 0;
}

std::string_view algorithm_name(HashAlgorithm algorithm) noexcept {
  switch (algorithm) {
    case HashAlgorithm::kMd5: return "md5";
    case HashAlgorithm::kSha1: return "sha1";
    case HashAlgorithm::kSha256: return "sha256";
  }
  return "";
}

std::optional<HashAlgorithm> parse_algorithm(std::string_view name) noexcept {
  for (auto a : kAllAlgorithms) {
    if (algorithm_name(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<HexDigest> HexDigest::parse(std::string_view text, HashAlgorithm algorithm) {
  if (text.size() != digest_hex_length(algorithm)) return std::nullopt;
  std::string hex(text);
  for (auto& c : hex) {
    if (!is_hex_digit(c)) return std::nullopt;
    if (c >= 'A' && c <= 'F') c = static_cast<char>(c - 'A' + 'a');
  }
  return HexDigest(std::move(hex));
}

std::string_view mode_name(const AttackMode& mode) noexcept {
  struct Visitor {
    std::string_view operator()(const BruteForce&) const { return "brute"; }
    std::string_view operator()(const Dictionary&) const { return "dictionary"; }
    std::string_view operator()(const RuleBased&) const { return "rules"; }
    std::string_view operator()(const Combinator&) const { return "combinator"; }
  };
  return std::visit(Visitor{}, mode);
}

std::vector<WordlistId> referenced_wordlists(const AttackMode& mode) {
  struct Visitor {
    std::vector<WordlistId> operator()(const BruteForce&) const { return {}; }
    std::vector<WordlistId> operator()(const Dictionary& d) const { return d.wordlists; }
    std::vector<WordlistId> operator()(const RuleBased& r) const { return r.wordlists; }
    std::vector<WordlistId> operator()(const Combinator& c) const { return {c.left, c.right}; }
  };
  return std::visit(Visitor{}, mode);
}

std::string_view job_status_name(JobStatus status) noexcept {
  switch (status) {
    case JobStatus::kCreated: return "created";
    case JobStatus::kDistributing: return "distributing";
    case JobStatus::kRunning: return "running";
    case JobStatus::kCompleted: return "completed";
    case JobStatus::kFailed: return "failed";
  }
  return "";
}

std::optional<JobStatus> parse_job_status(std::string_view name) noexcept {
  for (auto s : {JobStatus::kCreated, JobStatus::kDistributing, JobStatus::kRunning,
                 JobStatus::kCompleted, JobStatus::kFailed}) {
    if (job_status_name(s) == name) return s;
  }
  return std::nullopt;
}

bool is_terminal(JobStatus status) noexcept {
  return status == JobStatus::kCompleted || status == JobStatus::kFailed;
}

bool can_transition(JobStatus from, JobStatus to) noexcept {
  switch (from) {
    case JobStatus::kCreated: return to == JobStatus::kDistributing;
    case JobStatus::kDistributing: return to == JobStatus::kRunning;
    case JobStatus::kRunning: return to == JobStatus::kCompleted || to == JobStatus::kFailed;
    case JobStatus::kCompleted:
    case JobStatus::kFailed: return false;
  }
  return false;
}

void Job::advance(JobStatus to) {
  if (!can_transition(status, to)) {
    throw Error(ErrorCode::kInvalidArgument,
                "illegal job transition " + std::string(job_status_name(status)) + " -> " +
                    std::string(job_status_name(to)),
                "status");
  }
  status = to;
}

std::string_view engine_kind_name(EngineKind kind) noexcept {
  return kind == EngineKind::kBuiltin ? "builtin" : "external";
}

std::optional<EngineKind> parse_engine_kind(std::string_view name) noexcept {
  if (name == "builtin") return EngineKind::kBuiltin;
  if (name == "external") return EngineKind::kExternal;
  return std::nullopt;
}

const std::vector<HexDigest>& payload_hashes(const TaskPayload& payload) {
  return std::visit([](const auto& p) -> const std::vector<HexDigest>& { return p.hashes; },
                    payload);
}

std::vector<HexDigest>& payload_hashes(TaskPayload& payload) {
  return std::visit([](auto& p) -> std::vector<HexDigest>& { return p.hashes; }, payload);
}

std::string_view task_status_name(TaskStatus status) noexcept {
  switch (status) {
    case TaskStatus::kPending: return "pending";
    case TaskStatus::kSent: return "sent";
    case TaskStatus::kRunning: return "running";
    case TaskStatus::kExhausted: return "exhausted";
    case TaskStatus::kDone: return "done";
    case TaskStatus::kFailed: return "failed";
    case TaskStatus::kLost: return "lost";
  }
  return "";
}

std::optional<TaskStatus> parse_task_status(std::string_view name) noexcept {
  for (auto s : {TaskStatus::kPending, TaskStatus::kSent, TaskStatus::kRunning,
                 TaskStatus::kExhausted, TaskStatus::kDone, TaskStatus::kFailed,
                 TaskStatus::kLost}) {
    if (task_status_name(s) == name) return s;
  }
  return std::nullopt;
}

bool is_terminal(TaskStatus status) noexcept {
  return status == TaskStatus::kExhausted || status == TaskStatus::kDone ||
         status == TaskStatus::kFailed || status == TaskStatus::kLost;
}

}  // namespace crackmesh
