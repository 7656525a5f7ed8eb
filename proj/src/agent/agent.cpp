#include "crackmesh/agent/agent.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <cctype>

#include <spdlog/spdlog.h>

#include "crackmesh/common/error.hpp"
#include "crackmesh/engine/external.hpp"
#include "crackmesh/protocol/codec.hpp"

namespace crackmesh::agent {

namespace proto = protocol;
using std::chrono::steady_clock;

void validate(const AgentConfig& config) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, field + " " + why, field);
  };
  if (config.agent_name.empty()) bad("agent_name", "must not be empty");
  if (config.reconnect_initial.count() <= 0) bad("reconnect_initial", "must be positive");
  if (config.reconnect_max < config.reconnect_initial)
    bad("reconnect_max", "must be at least reconnect_initial");
  if (config.heartbeat_interval.count() <= 0) bad("heartbeat_interval", "must be positive");
  if (config.missed_heartbeats == 0) bad("missed_heartbeats", "must be positive");
  if (config.max_buffered == 0) bad("max_buffered", "must be positive");
  if (config.advertised_power)
    for (const auto& [algo, hps] : *config.advertised_power)
      if (!(hps > 0.0)) bad("advertised_power", "must be positive");
}

BackoffSchedule::BackoffSchedule(std::chrono::milliseconds initial, std::chrono::milliseconds max)
    : initial_(initial), max_(max), current_(initial) {}

std::chrono::milliseconds BackoffSchedule::next() {
  auto out = current_;
  current_ = std::min(max_, current_ * 2);
  return out;
}

std::string_view agent_state_name(AgentState state) noexcept {
  switch (state) {
    case AgentState::kConnecting: return "connecting";
    case AgentState::kRegistering: return "registering";
    case AgentState::kIdle: return "idle";
    case AgentState::kWorking: return "working";
  }
  return "connecting";
}

namespace {

std::pair<std::string, std::string> detect_platform() {
  utsname u{};
  if (::uname(&u) != 0) return {"unknown", "unknown"};
  std::string os = u.sysname;
  std::transform(os.begin(), os.end(), os.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return {os, u.machine};
}

std::filesystem::path resolve_wordlist(const std::filesystem::path& dir, const WordlistId& id) {
  if (id.empty() || id.find('/') != std::string::npos || id == "..")
    throw Error(ErrorCode::kUnknownWordlist, "invalid wordlist id '" + id + "'", "wordlists");
  for (auto candidate : {dir / id, dir / (id + ".txt")}) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(candidate, ec)) return candidate;
  }
  throw Error(ErrorCode::kUnknownWordlist,
              "wordlist '" + id + "' not found in " + dir.string(), "wordlists");
}

engine::Generator make_generator(const proto::TaskAssign& a, const std::filesystem::path& dir) {
  auto paths = [&](const std::vector<WordlistId>& ids) {
    std::vector<std::filesystem::path> out;
    for (const auto& id : ids) out.push_back(resolve_wordlist(dir, id));
    return out;
  };
  if (const auto* b = std::get_if<BruteForce>(&a.attack)) {
    if (!a.keyspace)
      throw Error(ErrorCode::kSchemaViolation, "brute-force task without keyspace", "keyspace");
    if (a.keyspace->length < b->min_len || a.keyspace->length > b->max_len)
      throw Error(ErrorCode::kSchemaViolation, "keyspace length outside attack bounds",
                  "keyspace.length");
    return engine::BruteGenerator{{a.keyspace->start, a.keyspace->end, a.keyspace->length}};
  }
  if (const auto* d = std::get_if<Dictionary>(&a.attack))
    return engine::WordlistGenerator{paths(a.wordlists.value_or(d->wordlists))};
  if (const auto* r = std::get_if<RuleBased>(&a.attack))
    return engine::RulesGenerator{paths(a.wordlists.value_or(r->wordlists)),
                                  a.rules.value_or(r->rules)};
  const auto& c = std::get<Combinator>(a.attack);
  return engine::CombinatorGenerator{resolve_wordlist(dir, c.left), resolve_wordlist(dir, c.right)};
}

}  // namespace

Agent::Agent(AgentConfig config, Connector& connector)
    : config_(std::move(config)), connector_(connector) {
  validate(config_);
  if (config_.os.empty() || config_.arch.empty()) {
    auto [os, arch] = detect_platform();
    if (config_.os.empty()) config_.os = os;
    if (config_.arch.empty()) config_.arch = arch;
  }
}

Agent::~Agent() {
  stop_engine();
  drop_channel();
}

std::optional<NodeId> Agent::node_id() const {
  std::lock_guard lock(channel_mu_);
  return node_id_;
}

std::size_t Agent::buffered() const {
  std::lock_guard lock(channel_mu_);
  return outbox_.size();
}

void Agent::push(Event event) {
  {
    std::lock_guard lock(queue_mu_);
    queue_.push_back(std::move(event));
  }
  queue_cv_.notify_one();
}

std::optional<Agent::Event> Agent::pop_until(SteadyTime deadline, std::stop_token stop) {
  std::unique_lock lock(queue_mu_);
  queue_cv_.wait_until(lock, stop, deadline, [&] { return !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  Event e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

bool Agent::open_channel() {
  state_ = AgentState::kConnecting;
  std::uint64_t gen;
  {
    std::lock_guard lock(channel_mu_);
    gen = ++generation_;
  }
  ChannelHandlers handlers{
      [this, gen](std::string frame) { push(InboundFrame{gen, std::move(frame)}); },
      [this, gen] { push(ChannelClosed{gen}); },
  };
  auto channel = connector_.connect(std::move(handlers));
  if (!channel) {
    spdlog::debug("agent {}: coordinator unreachable", config_.agent_name);
    return false;
  }
  std::lock_guard lock(channel_mu_);
  if (gen != generation_) return false;
  channel_ = std::move(channel);
  channel_open_ = true;
  registered_ = false;
  return true;
}

void Agent::drop_channel() {
  std::unique_ptr<AgentChannel> old;
  {
    std::lock_guard lock(channel_mu_);
    old = std::move(channel_);
    channel_open_ = false;
    registered_ = false;
    ++generation_;
  }
  if (old) old->close();
}

void Agent::sever() {
  std::uint64_t gen;
  {
    std::lock_guard lock(channel_mu_);
    if (!channel_) return;
    channel_->close();
    gen = generation_;
  }
  push(ChannelClosed{gen});
}

bool Agent::transmit(const proto::Message& message) {
  std::lock_guard lock(channel_mu_);
  if (!channel_open_ || !channel_) return false;
  if (!std::holds_alternative<proto::Register>(message) &&
      !std::holds_alternative<proto::Ping>(message) &&
      !std::holds_alternative<proto::Pong>(message) && !registered_)
    return false;
  return channel_->send(proto::encode(message));
}

void Agent::relay(const proto::Message& message) {
  {
    std::lock_guard lock(channel_mu_);
    if (outbox_.empty() && channel_open_ && registered_ && channel_ &&
        channel_->send(proto::encode(message)))
      return;
    if (outbox_.size() < config_.max_buffered) {
      outbox_.push_back(message);
      return;
    }
  }
  // Buffer full: give up on the task, keeping only its terminal message.
  if (!current_) return;
  auto task = *current_;
  spdlog::error("agent {}: event buffer full, failing task {}", config_.agent_name, task);
  stop_engine();
  {
    std::lock_guard lock(channel_mu_);
    outbox_.push_back(proto::TaskDone{task, proto::TaskOutcome::kFailed, "event buffer overflow"});
  }
}

void Agent::flush_outbox() {
  std::lock_guard lock(channel_mu_);
  while (!outbox_.empty() && channel_open_ && channel_) {
    if (!channel_->send(proto::encode(outbox_.front()))) break;
    outbox_.pop_front();
  }
}

void Agent::stop_engine() {
  if (engine_.joinable()) {
    engine_.request_stop();
    engine_.join();
  }
  current_.reset();
}

proto::Register Agent::registration() {
  proto::Register reg;
  reg.agent_name = config_.agent_name;
  reg.os = config_.os;
  reg.arch = config_.arch;
  reg.engine = config_.engine_kind;
  if (config_.advertised_power) {
    reg.benchmark = *config_.advertised_power;
  } else {
    for (auto algo : kAllAlgorithms)
      reg.benchmark[algo] = engine::self_benchmark(algo, config_.benchmark_budget);
  }
  return reg;
}

void Agent::run(std::stop_token stop) {
  BackoffSchedule backoff(config_.reconnect_initial, config_.reconnect_max);
  bool first = true;
  while (!stop.stop_requested()) {
    if (!first) idle_until(steady_clock::now() + backoff.next(), stop);
    first = false;
    if (stop.stop_requested()) break;
    if (!open_channel()) continue;
    session(stop);
    bool was_registered;
    {
      std::lock_guard lock(channel_mu_);
      was_registered = node_id_.has_value() && registered_;
    }
    drop_channel();
    if (was_registered) backoff.reset();
    state_ = AgentState::kConnecting;
  }
  stop_engine();
  drop_channel();
}

void Agent::idle_until(SteadyTime deadline, std::stop_token stop) {
  state_ = AgentState::kConnecting;
  while (!stop.stop_requested() && steady_clock::now() < deadline) {
    auto ev = pop_until(deadline, stop);
    if (ev) process(*ev);
  }
}

void Agent::session(std::stop_token stop) {
  state_ = AgentState::kRegistering;
  if (!transmit(registration())) return;
  const auto hb = config_.heartbeat_interval;
  const auto dead_after = hb * config_.missed_heartbeats;
  last_inbound_ = steady_clock::now();
  auto last_ping = steady_clock::now();
  while (!stop.stop_requested()) {
    auto deadline = std::min(last_ping + hb, last_inbound_ + dead_after);
    auto ev = pop_until(deadline, stop);
    if (ev) process(*ev);
    {
      std::lock_guard lock(channel_mu_);
      if (!channel_open_) return;
    }
    auto now = steady_clock::now();
    if (now - last_inbound_ > dead_after) {
      spdlog::warn("agent {}: coordinator silent, reconnecting", config_.agent_name);
      return;
    }
    if (now - last_ping >= hb) {
      transmit(proto::Ping{});
      last_ping = now;
    }
  }
}

void Agent::process(Event& event) {
  std::visit(
      [&](auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, InboundFrame>) {
          {
            std::lock_guard lock(channel_mu_);
            if (e.generation != generation_ || !channel_open_) return;
          }
          last_inbound_ = steady_clock::now();
          handle_frame(e.frame);
        } else if constexpr (std::is_same_v<T, ChannelClosed>) {
          std::lock_guard lock(channel_mu_);
          if (e.generation == generation_) channel_open_ = false;
        } else if constexpr (std::is_same_v<T, EngineOutput>) {
          if (current_ != e.task) return;
          std::visit(
              [&](const auto& ev) {
                using E = std::decay_t<decltype(ev)>;
                if constexpr (std::is_same_v<E, engine::CrackedEvent>) {
                  relay(proto::Cracked{e.task, ev.hash.str(), ev.plaintext});
                } else if constexpr (std::is_same_v<E, engine::ProgressEvent>) {
                  relay(proto::Progress{e.task, ev.tried, ev.speed_hps});
                } else {
                  auto outcome = ev.outcome == engine::FinishOutcome::kAllCracked
                                     ? proto::TaskOutcome::kAllCracked
                                     : proto::TaskOutcome::kExhausted;
                  auto task = e.task;
                  relay(proto::TaskDone{task, outcome, std::nullopt});
                  current_.reset();
                  if (state_ == AgentState::kWorking) state_ = AgentState::kIdle;
                }
              },
              e.event);
        } else {
          if (current_ != e.task) return;
          auto task = e.task;
          current_.reset();
          relay(proto::TaskDone{task, proto::TaskOutcome::kFailed,
                                e.error.value_or("engine stopped")});
          if (state_ == AgentState::kWorking) state_ = AgentState::kIdle;
        }
      },
      event);
}

void Agent::handle_frame(const std::string& frame) {
  proto::Message message;
  try {
    message = proto::decode(frame);
  } catch (const Error& e) {
    spdlog::warn("agent {}: bad frame from coordinator: {}", config_.agent_name, e.what());
    transmit(proto::ErrorMessage{std::string(error_code_name(e.code())), e.what()});
    return;
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, proto::RegisterAck>) {
          if (m.v != proto::kProtocolVersion) {
            spdlog::error("agent {}: coordinator speaks protocol v{}", config_.agent_name, m.v);
            std::lock_guard lock(channel_mu_);
            channel_open_ = false;
            return;
          }
          {
            std::lock_guard lock(channel_mu_);
            registered_ = true;
            node_id_ = m.node_id;
          }
          spdlog::info("agent {}: registered as {}", config_.agent_name, m.node_id);
          state_ = current_ ? AgentState::kWorking : AgentState::kIdle;
          flush_outbox();
        } else if constexpr (std::is_same_v<T, proto::TaskAssign>) {
          start_task(m);
        } else if constexpr (std::is_same_v<T, proto::Ping>) {
          transmit(proto::Pong{});
        } else if constexpr (std::is_same_v<T, proto::ErrorMessage>) {
          spdlog::warn("agent {}: coordinator error {}: {}", config_.agent_name, m.code,
                       m.message);
          if (m.code == "version_mismatch") {
            std::lock_guard lock(channel_mu_);
            channel_open_ = false;
          }
        }
      },
      message);
}

void Agent::start_task(const proto::TaskAssign& assign) {
  {
    std::lock_guard lock(channel_mu_);
    if (!registered_) return;
  }
  if (current_) {
    transmit(proto::ErrorMessage{"busy", "task " + std::to_string(*current_) + " in progress"});
    return;
  }
  if (engine_.joinable()) engine_.join();

  engine::EngineTask task;
  task.algorithm = assign.algorithm;
  task.targets = assign.hashes;
  const TaskId id = assign.task_id;
  try {
    task.generator = make_generator(assign, config_.wordlist_dir);
  } catch (const Error& e) {
    relay(proto::TaskAccept{id});
    relay(proto::TaskDone{id, proto::TaskOutcome::kFailed,
                          std::string(error_code_name(e.code())) + ": " + e.what()});
    return;
  }

  relay(proto::TaskAccept{id});
  current_ = id;
  state_ = AgentState::kWorking;
  spdlog::info("agent {}: running task {} of job {}", config_.agent_name, id, assign.job_id);

  const bool external = config_.engine_kind == EngineKind::kExternal;
  engine::ExternalEngineConfig ext{config_.external_engine_path.value_or(""), {}, {}};
  const auto interval = config_.progress_interval;
  engine_ = std::jthread([this, id, task = std::move(task), external, ext,
                          interval](std::stop_token stop) {
    engine::RunOptions options{interval, stop};
    auto sink = [&](const engine::EngineEvent& e) { push(EngineOutput{id, e}); };
    try {
      auto outcome = external ? engine::run_external_attack(task, ext, sink, options)
                              : engine::run_attack(task, sink, options);
      if (outcome == engine::AttackOutcome::kCancelled) push(EngineStopped{id, "cancelled"});
      else push(EngineStopped{id, std::nullopt});
    } catch (const Error& e) {
      push(EngineStopped{id, std::string(error_code_name(e.code())) + ": " + e.what()});
    } catch (const std::exception& e) {
      push(EngineStopped{id, e.what()});
    }
  });
}

}  // namespace crackmesh::agent
