#include "crackmesh/harness/in_memory.hpp"

#include "crackmesh/common/error.hpp"

namespace crackmesh::harness {

namespace {

struct Pipe {
  coordinator::Coordinator* coordinator = nullptr;
  coordinator::ConnectionId conn = 0;
  agent::ChannelHandlers handlers;
  std::atomic<bool> open{true};
  std::mutex deliver_mu;
};

class ServerLink : public coordinator::Link {
 public:
  explicit ServerLink(std::shared_ptr<Pipe> pipe) : pipe_(std::move(pipe)) {}

  void send(std::string frame) override {
    std::lock_guard lock(pipe_->deliver_mu);
    if (pipe_->open) pipe_->handlers.on_frame(std::move(frame));
  }
  void close() override {
    std::lock_guard lock(pipe_->deliver_mu);
    if (pipe_->open.exchange(false)) pipe_->handlers.on_closed();
  }

 private:
  std::shared_ptr<Pipe> pipe_;
};

class ClientChannel : public agent::AgentChannel {
 public:
  explicit ClientChannel(std::shared_ptr<Pipe> pipe) : pipe_(std::move(pipe)) {}
  ~ClientChannel() override { close(); }

  bool send(const std::string& frame) override {
    if (!pipe_->open) return false;
    pipe_->coordinator->agent_frame(pipe_->conn, frame);
    return true;
  }
  void close() override {
    if (pipe_->open.exchange(false)) pipe_->coordinator->agent_disconnected(pipe_->conn);
  }

 private:
  std::shared_ptr<Pipe> pipe_;
};

}  // namespace

std::unique_ptr<agent::AgentChannel> InMemoryConnector::connect(agent::ChannelHandlers handlers) {
  ++attempts_;
  if (!reachable_) return nullptr;
  auto pipe = std::make_shared<Pipe>();
  pipe->coordinator = &coordinator_;
  pipe->handlers = std::move(handlers);
  {
    // Hold delivery until the connection id is known.
    std::lock_guard lock(pipe->deliver_mu);
    pipe->conn = coordinator_.agent_connected(std::make_shared<ServerLink>(pipe));
  }
  return std::make_unique<ClientChannel>(pipe);
}

LocalCluster::LocalCluster(ClusterOptions options)
    : store_(options.store_path),
      coordinator_(store_, options.coordinator),
      connector_(coordinator_) {
  coordinator_.set_wordlists(std::move(options.wordlists));
  ticker_ = std::make_unique<coordinator::Ticker>(coordinator_, options.tick_period);
}

LocalCluster::~LocalCluster() {
  ticker_.reset();
  std::lock_guard lock(mu_);
  for (auto& [name, r] : agents_) {
    r.thread.request_stop();
    r.agent->sever();
  }
  agents_.clear();
}

agent::Agent& LocalCluster::start_agent(agent::AgentConfig config) {
  if (config.reconnect_initial == std::chrono::milliseconds(1'000))
    config.reconnect_initial = std::chrono::milliseconds(10);
  if (config.reconnect_max == std::chrono::milliseconds(30'000))
    config.reconnect_max = std::chrono::milliseconds(100);
  if (config.os.empty()) config.os = "linux";
  if (config.arch.empty()) config.arch = "x86_64";
  auto name = config.agent_name;
  std::lock_guard lock(mu_);
  if (agents_.count(name))
    throw Error(ErrorCode::kConflict, "agent '" + name + "' already running");
  auto& r = agents_[name];
  r.agent = std::make_unique<agent::Agent>(std::move(config), connector_);
  r.thread = std::jthread([a = r.agent.get()](std::stop_token stop) { a->run(stop); });
  return *r.agent;
}

void LocalCluster::kill_agent(const std::string& name) {
  Running victim;
  {
    std::lock_guard lock(mu_);
    auto it = agents_.find(name);
    if (it == agents_.end()) return;
    victim = std::move(it->second);
    agents_.erase(it);
  }
  victim.thread.request_stop();
  victim.agent->sever();
  victim.thread.join();
}

bool LocalCluster::wait_for_nodes(const std::vector<NodeId>& names,
                                  std::chrono::milliseconds timeout) {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    auto nodes = coordinator_.nodes();
    bool all = std::all_of(names.begin(), names.end(), [&](const NodeId& n) {
      return std::any_of(nodes.begin(), nodes.end(),
                         [&](const NodeProfile& p) { return p.node_id == n; });
    });
    if (all) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return false;
}

}  // namespace crackmesh::harness
