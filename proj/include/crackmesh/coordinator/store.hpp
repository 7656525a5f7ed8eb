#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "crackmesh/domain/types.hpp"

struct sqlite3;

namespace crackmesh::coordinator {

enum class Role { kUser, kAdmin };

std::string_view role_name(Role role) noexcept;
std::optional<Role> parse_role(std::string_view name) noexcept;

struct UserRecord {
  UserId id = 0;
  std::string username;
  Role role = Role::kUser;
  /// Encoded password hash, salt included.
  std::string credential;
};

struct TokenRecord {
  std::string token;
  UserId user_id = 0;
  TimestampMs expires_at = 0;
  bool revoked = false;
};

struct ActivityEvent {
  TimestampMs at = 0;
  UserId user_id = 0;
  JobId job_id = 0;
  std::string kind;  // "job_created" | "job_completed" | "job_failed"
  std::string mode;
  std::string algorithm;
};

/// Embedded transactional store (SQLite). Every write is committed before
/// the call returns. Thread-safe.
class Store {
 public:
  /// `path` may be ":memory:". Throws Error(kStorage).
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // users and tokens
  /// Throws Error(kConflict) for a duplicate username.
  UserId create_user(const std::string& username, const std::string& credential, Role role);
  std::optional<UserRecord> find_user(UserId id) const;
  std::optional<UserRecord> find_user_by_name(const std::string& username) const;
  std::vector<UserRecord> list_users() const;
  void put_token(const TokenRecord& token);
  std::optional<TokenRecord> find_token(const std::string& token) const;
  void revoke_token(const std::string& token);

  // nodes
  void upsert_node(const NodeProfile& node);
  std::vector<NodeProfile> load_nodes() const;

  // jobs and tasks
  /// Assigns and returns a fresh id; `job.id` is ignored.
  JobId insert_job(const Job& job);
  void update_job(const Job& job);
  std::vector<Job> load_jobs() const;
  void upsert_task(const TaskAssignment& task);
  std::vector<TaskAssignment> load_tasks() const;

  // results
  /// False when (job_id, hash) is already stored.
  bool insert_cracked(const CrackedResult& result);
  std::vector<CrackedResult> load_cracked() const;

  void append_activity(const ActivityEvent& event);
  std::vector<ActivityEvent> load_activity() const;

 private:
  void exec(const char* sql);

  mutable std::mutex mu_;
  sqlite3* db_ = nullptr;
};

}  // namespace crackmesh::coordinator
