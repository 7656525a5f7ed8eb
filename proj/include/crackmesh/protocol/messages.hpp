#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crackmesh/common/bigint.hpp"
#include "crackmesh/domain/types.hpp"

namespace crackmesh::protocol {

inline constexpr int kProtocolVersion = 1;

struct Register {
  int v = kProtocolVersion;
  std::string agent_name;
  std::string os;
  std::string arch;
  EngineKind engine = EngineKind::kBuiltin;
  std::map<HashAlgorithm, double> benchmark;
  friend bool operator==(const Register&, const Register&) = default;
};

struct RegisterAck {
  int v = kProtocolVersion;
  NodeId node_id;
  friend bool operator==(const RegisterAck&, const RegisterAck&) = default;
};

struct KeyspaceBounds {
  unsigned length = 1;
  BigInt start;
  BigInt end;
  friend bool operator==(const KeyspaceBounds&, const KeyspaceBounds&) = default;
};

struct TaskAssign {
  TaskId task_id = 0;
  JobId job_id = 0;
  HashAlgorithm algorithm = HashAlgorithm::kMd5;
  AttackMode attack;
  std::vector<HexDigest> hashes;
  std::optional<KeyspaceBounds> keyspace;
  /// The wordlists this task should read; absent means "those in attack".
  std::optional<std::vector<WordlistId>> wordlists;
  std::optional<std::vector<std::string>> rules;
  friend bool operator==(const TaskAssign&, const TaskAssign&) = default;
};

struct TaskAccept {
  TaskId task_id = 0;
  friend bool operator==(const TaskAccept&, const TaskAccept&) = default;
};

struct Progress {
  TaskId task_id = 0;
  std::uint64_t tried = 0;
  double speed_hps = 0.0;
  friend bool operator==(const Progress&, const Progress&) = default;
};

/// `plaintext` is raw bytes; it travels hex-encoded as `plaintext_hex`.
/// `hash` is lowercase hex of any supported digest length.
struct Cracked {
  TaskId task_id = 0;
  std::string hash;
  std::string plaintext;
  friend bool operator==(const Cracked&, const Cracked&) = default;
};

enum class TaskOutcome { kAllCracked, kExhausted, kFailed };

std::string_view outcome_name(TaskOutcome outcome) noexcept;

struct TaskDone {
  TaskId task_id = 0;
  TaskOutcome outcome = TaskOutcome::kExhausted;
  std::optional<std::string> detail;
  friend bool operator==(const TaskDone&, const TaskDone&) = default;
};

struct ErrorMessage {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

struct Ping {
  friend bool operator==(const Ping&, const Ping&) = default;
};

struct Pong {
  friend bool operator==(const Pong&, const Pong&) = default;
};

using Message = std::variant<Register, RegisterAck, TaskAssign, TaskAccept, Progress, Cracked,
                             TaskDone, ErrorMessage, Ping, Pong>;

/// The wire "type" discriminator of a message.
std::string_view message_type(const Message& message) noexcept;

}  // namespace crackmesh::protocol
