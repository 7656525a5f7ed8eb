#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <variant>

#include "crackmesh/agent/channel.hpp"
#include "crackmesh/domain/types.hpp"
#include "crackmesh/engine/attack.hpp"
#include "crackmesh/engine/benchmark.hpp"
#include "crackmesh/protocol/messages.hpp"

namespace crackmesh::agent {

struct AgentConfig {
  std::string coordinator_url;
  std::string agent_name;
  EngineKind engine_kind = EngineKind::kBuiltin;
  std::optional<std::string> external_engine_path;
  std::chrono::milliseconds reconnect_initial{1'000};
  std::chrono::milliseconds reconnect_max{30'000};
  std::chrono::milliseconds heartbeat_interval{10'000};
  unsigned missed_heartbeats = 2;
  /// Wordlist ids resolve to `<dir>/<id>` or `<dir>/<id>.txt`.
  std::filesystem::path wordlist_dir = ".";
  /// Replaces the self-benchmark when set.
  std::optional<std::map<HashAlgorithm, double>> advertised_power;
  engine::BenchmarkBudget benchmark_budget;
  std::uint64_t progress_interval = 100'000;
  std::size_t max_buffered = 10'000;
  std::string os;    // detected when empty
  std::string arch;  // detected when empty
};

/// Throws Error(kInvalidArgument) naming the bad field.
void validate(const AgentConfig& config);

/// initial, 2*initial, 4*initial, ... capped at max.
class BackoffSchedule {
 public:
  BackoffSchedule(std::chrono::milliseconds initial, std::chrono::milliseconds max);
  std::chrono::milliseconds next();
  void reset() { current_ = initial_; }

 private:
  std::chrono::milliseconds initial_;
  std::chrono::milliseconds max_;
  std::chrono::milliseconds current_;
};

enum class AgentState { kConnecting, kRegistering, kIdle, kWorking };

std::string_view agent_state_name(AgentState state) noexcept;

/// Node-resident runtime. Network traffic and the engine thread feed one
/// ordered event queue consumed by `run`.
class Agent {
 public:
  Agent(AgentConfig config, Connector& connector);
  ~Agent();
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  /// Connects, registers and serves tasks until `stop` fires.
  void run(std::stop_token stop);

  AgentState state() const noexcept { return state_.load(); }
  std::optional<NodeId> node_id() const;
  std::size_t buffered() const;
  /// Drops the current connection abruptly, as a network cut would.
  void sever();

 private:
  struct InboundFrame {
    std::uint64_t generation;
    std::string frame;
  };
  struct ChannelClosed {
    std::uint64_t generation;
  };
  struct EngineOutput {
    TaskId task;
    engine::EngineEvent event;
  };
  struct EngineStopped {
    TaskId task;
    std::optional<std::string> error;
  };
  using Event = std::variant<InboundFrame, ChannelClosed, EngineOutput, EngineStopped>;

  using SteadyTime = std::chrono::steady_clock::time_point;

  void push(Event event);
  std::optional<Event> pop_until(SteadyTime deadline, std::stop_token stop);

  bool open_channel();
  void drop_channel();
  void session(std::stop_token stop);
  void idle_until(SteadyTime deadline, std::stop_token stop);
  void process(Event& event);
  void handle_frame(const std::string& frame);
  void start_task(const protocol::TaskAssign& assign);
  void relay(const protocol::Message& message);
  bool transmit(const protocol::Message& message);
  void flush_outbox();
  void stop_engine();
  protocol::Register registration();

  AgentConfig config_;
  Connector& connector_;
  std::atomic<AgentState> state_{AgentState::kConnecting};

  mutable std::mutex queue_mu_;
  std::condition_variable_any queue_cv_;
  std::deque<Event> queue_;

  mutable std::mutex channel_mu_;
  std::unique_ptr<AgentChannel> channel_;
  std::uint64_t generation_ = 0;
  bool channel_open_ = false;
  bool registered_ = false;
  std::optional<NodeId> node_id_;
  SteadyTime last_inbound_{};

  std::deque<protocol::Message> outbox_;
  std::optional<TaskId> current_;
  std::jthread engine_;
};

}  // namespace crackmesh::agent
