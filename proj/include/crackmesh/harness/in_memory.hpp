#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "crackmesh/agent/agent.hpp"
#include "crackmesh/agent/channel.hpp"
#include "crackmesh/coordinator/coordinator.hpp"
#include "crackmesh/coordinator/store.hpp"

namespace crackmesh::harness {

/// Connects agents straight to an in-process Coordinator. Frames cross in
/// FIFO order per direction, exactly as over a websocket.
class InMemoryConnector : public agent::Connector {
 public:
  explicit InMemoryConnector(coordinator::Coordinator& coordinator) : coordinator_(coordinator) {}

  std::unique_ptr<agent::AgentChannel> connect(agent::ChannelHandlers handlers) override;

  /// While false, connect() fails as if the coordinator were down.
  void set_reachable(bool reachable) { reachable_ = reachable; }
  std::size_t attempts() const { return attempts_; }

 private:
  coordinator::Coordinator& coordinator_;
  std::atomic<bool> reachable_{true};
  std::atomic<std::size_t> attempts_{0};
};

struct ClusterOptions {
  coordinator::CoordinatorConfig coordinator;
  std::chrono::milliseconds tick_period{50};
  std::vector<WordlistMeta> wordlists;
  std::string store_path = ":memory:";
};

/// A coordinator plus any number of agent threads, all in one process.
class LocalCluster {
 public:
  explicit LocalCluster(ClusterOptions options = {});
  ~LocalCluster();

  coordinator::Coordinator& coordinator() { return coordinator_; }
  coordinator::Store& store() { return store_; }
  InMemoryConnector& connector() { return connector_; }

  /// Starts an agent thread. Unset timing fields get test-friendly values.
  agent::Agent& start_agent(agent::AgentConfig config);

  /// Stops the agent's thread and cuts its connection without any goodbye.
  void kill_agent(const std::string& name);

  /// Waits until every named node is registered and connected.
  bool wait_for_nodes(const std::vector<NodeId>& names, std::chrono::milliseconds timeout);

 private:
  struct Running {
    std::unique_ptr<agent::Agent> agent;
    std::jthread thread;
  };

  coordinator::Store store_;
  coordinator::Coordinator coordinator_;
  InMemoryConnector connector_;
  std::unique_ptr<coordinator::Ticker> ticker_;
  std::mutex mu_;
  std::map<std::string, Running> agents_;
};

}  // namespace crackmesh::harness
