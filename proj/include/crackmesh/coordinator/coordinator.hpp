#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "crackmesh/common/time.hpp"
#include "crackmesh/coordinator/stats.hpp"
#include "crackmesh/coordinator/store.hpp"
#include "crackmesh/domain/types.hpp"
#include "crackmesh/domain/validation.hpp"
#include "crackmesh/protocol/messages.hpp"

namespace crackmesh::coordinator {

/// Outbound half of a websocket-like connection. `send` and `close` must
/// not block and must not call back into the Coordinator.
class Link {
 public:
  virtual ~Link() = default;
  virtual void send(std::string frame) = 0;
  virtual void close() = 0;
};

using ConnectionId = std::uint64_t;

struct CoordinatorConfig {
  std::chrono::milliseconds accept_timeout{10'000};
  std::chrono::milliseconds heartbeat_interval{10'000};
  unsigned missed_heartbeats = 2;
  ValidationLimits limits;
};

/// Node registry, job planning, dispatch, result aggregation and failure
/// handling. Transport-agnostic: connections are fed in through the
/// agent_* and ui_* entry points. All state changes are serialized.
class Coordinator {
 public:
  explicit Coordinator(Store& store, CoordinatorConfig config = {}, Clock clock = system_now_ms);

  /// Reloads persisted state. In-flight tasks become Lost and are
  /// replanned once one of their job's requested nodes registers.
  void recover();

  void set_wordlists(std::vector<WordlistMeta> wordlists);
  std::vector<WordlistMeta> wordlists() const;

  ConnectionId agent_connected(std::shared_ptr<Link> link);
  void agent_frame(ConnectionId conn, std::string_view frame);
  /// Idempotent; ignored for connections the coordinator already closed.
  void agent_disconnected(ConnectionId conn);

  ConnectionId ui_subscribe(JobId job, std::shared_ptr<Link> link);
  void ui_unsubscribe(ConnectionId conn);

  /// Enforces heartbeat and accept timeouts against the injected clock.
  void tick();

  /// Validates, plans and dispatches. Nothing is persisted when planning
  /// fails. Returns the job as stored (Distributing).
  Job submit_job(const JobRequest& request);

  std::vector<NodeProfile> nodes(bool connected_only = true) const;
  std::optional<Job> job(JobId id) const;
  std::vector<Job> jobs() const;
  std::vector<TaskAssignment> tasks(JobId id) const;
  /// Ordered by cracked_at.
  std::vector<CrackedResult> results(JobId id) const;

  JobStats job_statistics(JobId id) const;
  UserStats user_statistics(UserId user) const;
  AdminStats admin_statistics() const;

  /// True once the job is terminal; false on timeout or unknown job.
  bool wait_for_terminal(JobId id, std::chrono::milliseconds timeout) const;

 private:
  struct Connection {
    std::shared_ptr<Link> link;
    std::optional<NodeId> node;
    TimestampMs last_frame = 0;
  };
  struct NodeState {
    NodeProfile profile;
    std::optional<ConnectionId> conn;
    std::optional<TaskId> active;
    std::deque<TaskId> queue;
    /// The agent answered "busy"; wait for its previous task to finish.
    bool blocked = false;
    std::uint64_t suspect_incidents = 0;
  };
  struct TaskState {
    TaskAssignment task;
    TimestampMs sent_at = 0;
  };
  struct JobState {
    Job job;
    std::vector<TaskId> tasks;
    std::unordered_set<HexDigest> cracked;
    std::vector<CrackedResult> results;
    unsigned wave = 0;
    bool needs_plan = false;
  };
  struct UiSubscriber {
    JobId job = 0;
    std::shared_ptr<Link> link;
  };

  void send(ConnectionId conn, const protocol::Message& message);
  void close_connection(ConnectionId conn);
  void handle_register(ConnectionId conn, const protocol::Register& msg);
  void handle_message(const NodeId& node, const protocol::Message& message);
  void handle_cracked(const NodeId& node, const protocol::Cracked& msg);
  void handle_done(const NodeId& node, const protocol::TaskDone& msg);

  void node_lost(const NodeId& node, bool defer);
  void dispatch(std::vector<TaskAssignment> tasks);
  void pump(const NodeId& node);
  void replan(TaskId lost, bool defer);
  void retry_orphans(const NodeId& registered);
  void plan_recovered(JobState& js);
  void evaluate(JobId job);
  void finish(JobState& js, JobStatus status);
  void persist(const TaskState& ts);
  void persist(const JobState& js);

  std::vector<HexDigest> remaining_targets(const TaskAssignment& task) const;
  std::vector<NodeProfile> profiles() const;
  UsageStats usage_of(const std::vector<const Job*>& jobs) const;
  void broadcast(JobId job, const nlohmann::json& event);
  nlohmann::json status_event(const JobState& js) const;

  Store& store_;
  CoordinatorConfig config_;
  Clock clock_;

  mutable std::mutex mu_;
  mutable std::condition_variable job_cv_;
  std::map<ConnectionId, Connection> conns_;
  std::map<NodeId, NodeState> nodes_;
  std::map<TaskId, TaskState> tasks_;
  std::map<JobId, JobState> jobs_;
  std::map<ConnectionId, UiSubscriber> ui_;
  std::set<TaskId> orphans_;
  std::vector<WordlistMeta> wordlists_;
  ConnectionId next_conn_ = 1;
  TaskId next_task_ = 1;
};

/// Calls `tick()` on a fixed period until destroyed.
class Ticker {
 public:
  Ticker(Coordinator& coordinator, std::chrono::milliseconds period);

 private:
  std::jthread thread_;
};

}  // namespace crackmesh::coordinator
