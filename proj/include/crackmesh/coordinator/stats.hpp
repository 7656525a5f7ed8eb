#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crackmesh/domain/types.hpp"

namespace crackmesh::coordinator {

struct NodeTaskStats {
  NodeId node_id;
  std::uint64_t tried = 0;
  double speed_hps = 0.0;
};

struct JobStats {
  JobId job_id = 0;
  JobStatus status = JobStatus::kCreated;
  std::size_t cracked_count = 0;
  std::size_t total_hashes = 0;
  /// cracked_count / total_hashes * 100.
  double recovery_pct = 0.0;
  std::vector<NodeTaskStats> per_node;
  double elapsed_s = 0.0;
  bool partial_results = false;
  std::size_t task_count = 0;
};

struct DailyActivity {
  std::string day;  // YYYY-MM-DD, UTC
  std::size_t jobs = 0;
  std::map<std::string, std::size_t> by_mode;
  std::map<std::string, std::size_t> by_algorithm;
};

/// Raw counts plus derived percentages. Every status, mode and algorithm
/// has an entry, zero included.
struct UsageStats {
  std::size_t total_jobs = 0;
  std::size_t active_jobs = 0;
  std::map<std::string, std::size_t> by_status;
  std::map<std::string, std::size_t> by_mode;
  std::map<std::string, std::size_t> by_algorithm;
  std::map<std::string, double> mode_share;
  std::map<std::string, double> algorithm_share;
  std::vector<DailyActivity> activity;
  std::size_t cracked_total = 0;
};

struct UserStats {
  UserId user_id = 0;
  std::string username;
  UsageStats usage;
};

struct NodeInventoryEntry {
  NodeProfile profile;
  std::uint64_t suspect_incidents = 0;
  std::optional<TaskId> current_task;
};

struct AdminStats {
  UsageStats usage;
  std::size_t user_count = 0;
  std::vector<NodeInventoryEntry> nodes;
};

}  // namespace crackmesh::coordinator
