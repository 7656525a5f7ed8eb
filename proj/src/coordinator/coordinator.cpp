#include "crackmesh/coordinator/coordinator.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "crackmesh/common/error.hpp"
#include "crackmesh/common/hex.hpp"
#include "crackmesh/coordinator/planner.hpp"
#include "crackmesh/engine/digest.hpp"
#include "crackmesh/protocol/codec.hpp"

namespace crackmesh::coordinator {

using nlohmann::json;
namespace proto = protocol;

namespace {

bool is_live(TaskStatus s) { return s != TaskStatus::kLost; }

bool in_flight(TaskStatus s) {
  return s == TaskStatus::kPending || s == TaskStatus::kSent || s == TaskStatus::kRunning;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Coordinator::Coordinator(Store& store, CoordinatorConfig config, Clock clock)
    : store_(store), config_(config), clock_(std::move(clock)) {}

void Coordinator::set_wordlists(std::vector<WordlistMeta> wordlists) {
  std::lock_guard lock(mu_);
  wordlists_ = std::move(wordlists);
}

std::vector<WordlistMeta> Coordinator::wordlists() const {
  std::lock_guard lock(mu_);
  return wordlists_;
}

// ---------------------------------------------------------------- recovery

void Coordinator::recover() {
  std::lock_guard lock(mu_);
  for (auto& n : store_.load_nodes()) {
    auto& ns = nodes_[n.node_id];
    ns.profile = std::move(n);
  }
  for (auto& j : store_.load_jobs()) {
    auto& js = jobs_[j.id];
    if (const auto* b = std::get_if<BruteForce>(&j.mode)) js.wave = b->min_len;
    js.job = std::move(j);
  }
  for (auto& r : store_.load_cracked()) {
    auto it = jobs_.find(r.job_id);
    if (it == jobs_.end()) continue;
    it->second.cracked.insert(r.hash);
    it->second.results.push_back(std::move(r));
  }
  for (auto& t : store_.load_tasks()) {
    next_task_ = std::max(next_task_, t.task_id + 1);
    auto it = jobs_.find(t.job_id);
    if (it == jobs_.end()) continue;
    auto& js = it->second;
    js.tasks.push_back(t.task_id);
    js.wave = std::max(js.wave, t.wave);
    auto& ts = tasks_[t.task_id];
    ts.task = std::move(t);
    if (!is_terminal(js.job.status) && in_flight(ts.task.status)) {
      ts.task.status = TaskStatus::kLost;
      persist(ts);
      orphans_.insert(ts.task.task_id);
    }
  }
  for (auto& [id, js] : jobs_)
    if (js.job.status == JobStatus::kCreated) js.needs_plan = true;
  spdlog::info("recovered {} jobs, {} tasks, {} orphaned", jobs_.size(), tasks_.size(),
               orphans_.size());
}

// ------------------------------------------------------------- connections

ConnectionId Coordinator::agent_connected(std::shared_ptr<Link> link) {
  std::lock_guard lock(mu_);
  auto id = next_conn_++;
  conns_[id] = Connection{std::move(link), std::nullopt, clock_()};
  return id;
}

void Coordinator::agent_disconnected(ConnectionId conn) {
  std::lock_guard lock(mu_);
  auto it = conns_.find(conn);
  if (it == conns_.end()) return;
  auto node = it->second.node;
  conns_.erase(it);
  if (node && nodes_[*node].conn == conn) node_lost(*node, false);
}

void Coordinator::close_connection(ConnectionId conn) {
  auto it = conns_.find(conn);
  if (it == conns_.end()) return;
  auto node = it->second.node;
  it->second.link->close();
  conns_.erase(it);
  if (node && nodes_[*node].conn == conn) node_lost(*node, false);
}

void Coordinator::send(ConnectionId conn, const proto::Message& message) {
  auto it = conns_.find(conn);
  if (it != conns_.end()) it->second.link->send(proto::encode(message));
}

void Coordinator::agent_frame(ConnectionId conn, std::string_view frame) {
  std::lock_guard lock(mu_);
  auto it = conns_.find(conn);
  if (it == conns_.end()) return;
  it->second.last_frame = clock_();

  proto::Message message;
  try {
    message = proto::decode(frame);
  } catch (const Error& e) {
    spdlog::warn("connection {}: {}", conn, e.what());
    send(conn, proto::ErrorMessage{std::string(error_code_name(e.code())), e.what()});
    return;
  }

  if (std::holds_alternative<proto::Ping>(message)) {
    send(conn, proto::Pong{});
    return;
  }
  if (std::holds_alternative<proto::Pong>(message)) return;

  if (!it->second.node) {
    if (const auto* reg = std::get_if<proto::Register>(&message)) {
      handle_register(conn, *reg);
    } else {
      send(conn, proto::ErrorMessage{"not_registered", "register before any task traffic"});
    }
    return;
  }
  const NodeId node = *it->second.node;
  nodes_[node].profile.last_seen = clock_();
  handle_message(node, message);
}

void Coordinator::handle_register(ConnectionId conn, const proto::Register& msg) {
  if (msg.v != proto::kProtocolVersion) {
    send(conn, proto::ErrorMessage{"version_mismatch",
                                   "protocol version " + std::to_string(proto::kProtocolVersion) +
                                       " required"});
    close_connection(conn);
    return;
  }
  if (msg.agent_name.empty()) {
    send(conn, proto::ErrorMessage{"schema_violation", "agent_name must not be empty"});
    close_connection(conn);
    return;
  }
  const NodeId id = msg.agent_name;
  auto& ns = nodes_[id];
  if (ns.conn && *ns.conn != conn) {
    spdlog::info("node {} re-registered; superseding connection {}", id, *ns.conn);
    auto old = conns_.find(*ns.conn);
    if (old != conns_.end()) {
      old->second.link->close();
      conns_.erase(old);
    }
    node_lost(id, true);
  }
  ns.profile.node_id = id;
  ns.profile.agent_name = msg.agent_name;
  ns.profile.os = msg.os;
  ns.profile.arch = msg.arch;
  ns.profile.engine_kind = msg.engine;
  ns.profile.power = msg.benchmark;
  ns.profile.connected = true;
  ns.profile.last_seen = clock_();
  ns.conn = conn;
  ns.active.reset();
  ns.blocked = false;
  conns_[conn].node = id;
  store_.upsert_node(ns.profile);
  spdlog::info("node {} registered ({} {}, {})", id, msg.os, msg.arch,
               engine_kind_name(msg.engine));
  send(conn, proto::RegisterAck{proto::kProtocolVersion, id});
  retry_orphans(id);
  pump(id);
}

void Coordinator::handle_message(const NodeId& node, const proto::Message& message) {
  auto owned = [&](TaskId id) -> TaskState* {
    auto it = tasks_.find(id);
    if (it == tasks_.end() || it->second.task.node_id != node) return nullptr;
    return &it->second;
  };
  std::visit(
      overloaded{
          [&](const proto::TaskAccept& m) {
            auto* ts = owned(m.task_id);
            if (!ts || ts->task.status != TaskStatus::kSent) return;
            ts->task.status = TaskStatus::kRunning;
            persist(*ts);
            evaluate(ts->task.job_id);
          },
          [&](const proto::Progress& m) {
            auto* ts = owned(m.task_id);
            if (!ts) return;
            auto& t = ts->task;
            if (t.status != TaskStatus::kSent && t.status != TaskStatus::kRunning) return;
            bool accepted = t.status == TaskStatus::kSent;
            t.status = TaskStatus::kRunning;
            t.tried = m.tried;
            t.speed_hps = m.speed_hps;
            persist(*ts);
            broadcast(t.job_id, {{"type", "progress"},
                                 {"job_id", t.job_id},
                                 {"task_id", t.task_id},
                                 {"node_id", node},
                                 {"tried", m.tried},
                                 {"speed_hps", m.speed_hps}});
            if (accepted) evaluate(t.job_id);
          },
          [&](const proto::Cracked& m) { handle_cracked(node, m); },
          [&](const proto::TaskDone& m) { handle_done(node, m); },
          [&](const proto::ErrorMessage& m) {
            auto& ns = nodes_[node];
            spdlog::warn("node {} reported {}: {}", node, m.code, m.message);
            if (m.code != "busy" || !ns.active) return;
            auto& ts = tasks_[*ns.active];
            if (ts.task.status != TaskStatus::kSent) return;
            ts.task.status = TaskStatus::kPending;
            persist(ts);
            ns.queue.push_front(*ns.active);
            ns.active.reset();
            ns.blocked = true;
          },
          [&](const proto::Register&) {
            auto& ns = nodes_[node];
            if (ns.conn)
              send(*ns.conn, proto::ErrorMessage{"already_registered", "connection is registered"});
          },
          [&](const auto&) {},
      },
      message);
}

void Coordinator::handle_cracked(const NodeId& node, const proto::Cracked& m) {
  auto it = tasks_.find(m.task_id);
  if (it == tasks_.end() || it->second.task.node_id != node) return;
  auto& js = jobs_[it->second.task.job_id];
  if (is_terminal(js.job.status)) return;

  auto hash = HexDigest::parse(m.hash, js.job.algorithm);
  bool valid = hash && std::find(js.job.hashes.begin(), js.job.hashes.end(), *hash) !=
                           js.job.hashes.end();
  if (valid) valid = engine::digest(js.job.algorithm, m.plaintext) == *hash;
  if (!valid) {
    auto& ns = nodes_[node];
    ++ns.suspect_incidents;
    spdlog::error("node {} sent an unverifiable crack for job {} (hash {}); discarded", node,
                  js.job.id, m.hash);
    return;
  }
  if (js.cracked.count(*hash)) return;

  CrackedResult r{js.job.id, *hash, m.plaintext, node, clock_()};
  store_.insert_cracked(r);
  js.cracked.insert(*hash);
  js.results.push_back(r);
  broadcast(js.job.id, {{"type", "cracked"},
                        {"job_id", js.job.id},
                        {"hash", r.hash.str()},
                        {"plaintext", escape_bytes(r.plaintext)},
                        {"plaintext_hex", hex_encode(r.plaintext)},
                        {"node_id", node},
                        {"cracked_at", format_iso8601(r.at)}});
  broadcast(js.job.id, status_event(js));
}

void Coordinator::handle_done(const NodeId& node, const proto::TaskDone& m) {
  auto& ns = nodes_[node];
  auto it = tasks_.find(m.task_id);
  bool mine = it != tasks_.end() && it->second.task.node_id == node;
  if (mine && (it->second.task.status == TaskStatus::kSent ||
               it->second.task.status == TaskStatus::kRunning)) {
    auto& t = it->second.task;
    switch (m.outcome) {
      case proto::TaskOutcome::kAllCracked: t.status = TaskStatus::kDone; break;
      case proto::TaskOutcome::kExhausted: t.status = TaskStatus::kExhausted; break;
      case proto::TaskOutcome::kFailed:
        t.status = TaskStatus::kFailed;
        spdlog::warn("task {} failed on {}: {}", t.task_id, node, m.detail.value_or(""));
        break;
    }
    persist(it->second);
    if (ns.active == m.task_id) ns.active.reset();
    ns.blocked = false;
    auto job = t.job_id;
    pump(node);
    evaluate(job);
    return;
  }
  // A replayed completion of a task already given up on frees the agent.
  if (ns.active == m.task_id) ns.active.reset();
  ns.blocked = false;
  pump(node);
}

// ---------------------------------------------------------------- failures

void Coordinator::node_lost(const NodeId& node, bool defer) {
  auto& ns = nodes_[node];
  ns.conn.reset();
  ns.profile.connected = false;
  ns.profile.last_seen = clock_();
  ns.blocked = false;
  store_.upsert_node(ns.profile);

  std::vector<TaskId> lost(ns.queue.begin(), ns.queue.end());
  if (ns.active) lost.insert(lost.begin(), *ns.active);
  ns.active.reset();
  ns.queue.clear();
  if (lost.empty()) return;
  spdlog::warn("node {} lost with {} task(s) outstanding", node, lost.size());

  std::set<JobId> affected;
  for (auto id : lost) {
    auto& ts = tasks_[id];
    ts.task.status = TaskStatus::kLost;
    persist(ts);
    affected.insert(ts.task.job_id);
  }
  for (auto id : lost) replan(id, defer);
  for (auto job : affected) evaluate(job);
}

std::vector<HexDigest> Coordinator::remaining_targets(const TaskAssignment& task) const {
  const auto& js = jobs_.at(task.job_id);
  std::vector<HexDigest> out;
  for (const auto& h : payload_hashes(task.payload))
    if (!js.cracked.count(h)) out.push_back(h);
  return out;
}

void Coordinator::replan(TaskId lost, bool defer) {
  const auto& t = tasks_.at(lost).task;
  auto& js = jobs_.at(t.job_id);
  if (is_terminal(js.job.status)) return;
  auto remaining = remaining_targets(t);
  if (remaining.empty()) return;

  distribution::PowerMap powers;
  try {
    powers = eligible_powers(js.job, profiles());
  } catch (const Error& e) {
    if (defer) {
      orphans_.insert(lost);
    } else {
      spdlog::warn("job {}: {}; failing", js.job.id, e.what());
      finish(js, JobStatus::kFailed);
    }
    return;
  }
  auto replacement = replan_lost(t, remaining, powers, next_task_);
  next_task_ += replacement.size();
  dispatch(std::move(replacement));
}

void Coordinator::retry_orphans(const NodeId& registered) {
  std::set<JobId> affected;
  for (auto& [id, js] : jobs_) {
    if (is_terminal(js.job.status)) continue;
    const auto& req = js.job.requested_nodes;
    if (std::find(req.begin(), req.end(), registered) == req.end()) continue;
    affected.insert(id);
  }
  for (auto id : std::vector<TaskId>(orphans_.begin(), orphans_.end())) {
    if (!affected.count(tasks_.at(id).task.job_id)) continue;
    orphans_.erase(id);
    replan(id, true);
  }
  for (auto job : affected) {
    auto& js = jobs_.at(job);
    if (js.needs_plan) plan_recovered(js);
    evaluate(job);
  }
}

void Coordinator::plan_recovered(JobState& js) {
  try {
    auto powers = eligible_powers(js.job, profiles());
    auto plan = plan_initial(js.job, powers, wordlists_, next_task_);
    next_task_ += plan.size();
    js.needs_plan = false;
    js.job.advance(JobStatus::kDistributing);
    persist(js);
    dispatch(std::move(plan));
  } catch (const Error& e) {
    spdlog::warn("job {} not yet plannable: {}", js.job.id, e.what());
  }
}

void Coordinator::tick() {
  std::lock_guard lock(mu_);
  const auto now = clock_();
  const auto dead_after =
      static_cast<TimestampMs>(config_.heartbeat_interval.count()) * config_.missed_heartbeats;
  std::vector<ConnectionId> dead;
  for (const auto& [id, c] : conns_)
    if (now - c.last_frame > dead_after) dead.push_back(id);
  for (const auto& [id, ts] : tasks_) {
    if (ts.task.status != TaskStatus::kSent) continue;
    if (now - ts.sent_at <= config_.accept_timeout.count()) continue;
    auto& ns = nodes_[ts.task.node_id];
    if (ns.conn) {
      spdlog::warn("task {} not accepted by {} in time", id, ts.task.node_id);
      dead.push_back(*ns.conn);
    }
  }
  std::sort(dead.begin(), dead.end());
  dead.erase(std::unique(dead.begin(), dead.end()), dead.end());
  for (auto id : dead) close_connection(id);
}

// ---------------------------------------------------------------- dispatch

Job Coordinator::submit_job(const JobRequest& request) {
  std::lock_guard lock(mu_);
  auto registry = profiles();
  Job job = validate_job(request, registry, wordlists_, config_.limits);
  job.created_at = clock_();
  auto powers = eligible_powers(job, registry);
  auto plan = plan_initial(job, powers, wordlists_, next_task_);

  job.advance(JobStatus::kDistributing);
  job.id = store_.insert_job(job);
  auto& js = jobs_[job.id];
  js.job = job;
  if (const auto* b = std::get_if<BruteForce>(&job.mode)) js.wave = b->min_len;
  next_task_ += plan.size();
  for (auto& t : plan) t.job_id = job.id;
  store_.append_activity({job.created_at, job.owner, job.id, "job_created",
                          std::string(mode_name(job.mode)),
                          std::string(algorithm_name(job.algorithm))});
  spdlog::info("job {} submitted: {} {} over {} hash(es), {} task(s)", job.id,
               algorithm_name(job.algorithm), mode_name(job.mode), job.hashes.size(), plan.size());
  dispatch(std::move(plan));
  return jobs_.at(job.id).job;
}

void Coordinator::dispatch(std::vector<TaskAssignment> tasks) {
  std::vector<TaskId> offline;
  std::set<NodeId> touched;
  for (auto& t : tasks) {
    auto id = t.task_id;
    auto& ts = tasks_[id];
    ts.task = std::move(t);
    jobs_.at(ts.task.job_id).tasks.push_back(id);
    persist(ts);
    auto& ns = nodes_[ts.task.node_id];
    if (ns.conn) {
      ns.queue.push_back(id);
      touched.insert(ts.task.node_id);
    } else {
      offline.push_back(id);
    }
  }
  for (auto id : offline) {
    auto& ts = tasks_[id];
    ts.task.status = TaskStatus::kLost;
    persist(ts);
    replan(id, false);
  }
  for (const auto& n : touched) pump(n);
}

void Coordinator::pump(const NodeId& node) {
  auto& ns = nodes_[node];
  while (ns.conn && !ns.active && !ns.blocked && !ns.queue.empty()) {
    auto id = ns.queue.front();
    ns.queue.pop_front();
    auto& ts = tasks_[id];
    auto& t = ts.task;
    if (t.status != TaskStatus::kPending) continue;
    auto& js = jobs_.at(t.job_id);
    auto targets = remaining_targets(t);
    if (is_terminal(js.job.status) || targets.empty()) {
      t.status = TaskStatus::kDone;
      persist(ts);
      evaluate(t.job_id);
      continue;
    }

    proto::TaskAssign msg;
    msg.task_id = t.task_id;
    msg.job_id = t.job_id;
    msg.algorithm = js.job.algorithm;
    msg.attack = js.job.mode;
    msg.hashes = std::move(targets);
    std::visit(overloaded{
                   [&](const KeyspaceSlice& p) {
                     msg.keyspace = proto::KeyspaceBounds{p.length, p.start, p.end};
                   },
                   [&](const WordlistSlice& p) {
                     if (!std::holds_alternative<Combinator>(js.job.mode)) msg.wordlists = p.wordlists;
                   },
                   [&](const HashSlice&) {},
               },
               t.payload);
    t.status = TaskStatus::kSent;
    ts.sent_at = clock_();
    ns.active = id;
    persist(ts);
    send(*ns.conn, msg);
  }
}

void Coordinator::evaluate(JobId job) {
  auto& js = jobs_.at(job);
  if (is_terminal(js.job.status)) return;
  bool waiting = false, all_terminal = true, any_ok = false, any_live = false;
  for (auto id : js.tasks) {
    const auto& t = tasks_.at(id).task;
    if (!is_live(t.status)) continue;
    any_live = true;
    if (t.status == TaskStatus::kPending || t.status == TaskStatus::kSent) waiting = true;
    if (!is_terminal(t.status)) all_terminal = false;
    if (t.status == TaskStatus::kDone || t.status == TaskStatus::kExhausted) any_ok = true;
  }
  for (auto id : orphans_)
    if (tasks_.at(id).task.job_id == job) return;
  if (js.needs_plan) return;

  if (js.job.status == JobStatus::kDistributing && !waiting && any_live) {
    js.job.advance(JobStatus::kRunning);
    persist(js);
    broadcast(job, status_event(js));
  }
  if (!all_terminal) return;

  const bool all_cracked = js.cracked.size() == js.job.hashes.size();
  if (const auto* b = std::get_if<BruteForce>(&js.job.mode); b && !all_cracked && js.wave < b->max_len) {
    ++js.wave;
    try {
      auto powers = eligible_powers(js.job, profiles());
      Job remaining = js.job;
      remaining.hashes.clear();
      for (const auto& h : js.job.hashes)
        if (!js.cracked.count(h)) remaining.hashes.push_back(h);
      auto wave = plan_wave(remaining, js.wave, powers, next_task_);
      next_task_ += wave.size();
      spdlog::info("job {}: starting wave for length {}", job, js.wave);
      dispatch(std::move(wave));
    } catch (const Error& e) {
      spdlog::warn("job {}: {}; failing", job, e.what());
      finish(js, JobStatus::kFailed);
    }
    return;
  }
  finish(js, (any_ok || all_cracked) ? JobStatus::kCompleted : JobStatus::kFailed);
}

void Coordinator::finish(JobState& js, JobStatus status) {
  if (is_terminal(js.job.status)) return;
  if (js.job.status == JobStatus::kCreated) js.job.advance(JobStatus::kDistributing);
  if (js.job.status == JobStatus::kDistributing) js.job.advance(JobStatus::kRunning);
  js.job.advance(status);
  js.job.finished_at = clock_();
  js.job.partial_results = status == JobStatus::kFailed && !js.cracked.empty();
  js.needs_plan = false;
  for (auto it = orphans_.begin(); it != orphans_.end();)
    it = tasks_.at(*it).task.job_id == js.job.id ? orphans_.erase(it) : std::next(it);
  persist(js);
  store_.append_activity({*js.job.finished_at, js.job.owner, js.job.id,
                          status == JobStatus::kCompleted ? "job_completed" : "job_failed",
                          std::string(mode_name(js.job.mode)),
                          std::string(algorithm_name(js.job.algorithm))});
  spdlog::info("job {} {} with {}/{} cracked", js.job.id, job_status_name(status),
               js.cracked.size(), js.job.hashes.size());
  broadcast(js.job.id, status_event(js));
  job_cv_.notify_all();
}

void Coordinator::persist(const TaskState& ts) { store_.upsert_task(ts.task); }
void Coordinator::persist(const JobState& js) { store_.update_job(js.job); }

std::vector<NodeProfile> Coordinator::profiles() const {
  std::vector<NodeProfile> out;
  out.reserve(nodes_.size());
  for (const auto& [id, ns] : nodes_) out.push_back(ns.profile);
  return out;
}

// ---------------------------------------------------------------------- UI

ConnectionId Coordinator::ui_subscribe(JobId job, std::shared_ptr<Link> link) {
  std::lock_guard lock(mu_);
  auto id = next_conn_++;
  auto it = jobs_.find(job);
  if (it != jobs_.end()) link->send(status_event(it->second).dump());
  ui_[id] = UiSubscriber{job, std::move(link)};
  return id;
}

void Coordinator::ui_unsubscribe(ConnectionId conn) {
  std::lock_guard lock(mu_);
  ui_.erase(conn);
}

void Coordinator::broadcast(JobId job, const json& event) {
  std::string frame;
  for (const auto& [id, sub] : ui_) {
    if (sub.job != job) continue;
    if (frame.empty()) frame = event.dump(-1, ' ', false, json::error_handler_t::replace);
    sub.link->send(frame);
  }
}

json Coordinator::status_event(const JobState& js) const {
  return {{"type", "status"},
          {"job_id", js.job.id},
          {"status", job_status_name(js.job.status)},
          {"cracked_count", js.cracked.size()},
          {"total_hashes", js.job.hashes.size()},
          {"partial_results", js.job.partial_results}};
}

// ------------------------------------------------------------------- reads

std::vector<NodeProfile> Coordinator::nodes(bool connected_only) const {
  std::lock_guard lock(mu_);
  std::vector<NodeProfile> out;
  for (const auto& [id, ns] : nodes_)
    if (!connected_only || ns.profile.connected) out.push_back(ns.profile);
  return out;
}

std::optional<Job> Coordinator::job(JobId id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second.job;
}

std::vector<Job> Coordinator::jobs() const {
  std::lock_guard lock(mu_);
  std::vector<Job> out;
  for (const auto& [id, js] : jobs_) out.push_back(js.job);
  return out;
}

std::vector<TaskAssignment> Coordinator::tasks(JobId id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kUnknownJob, "unknown job " + std::to_string(id));
  std::vector<TaskAssignment> out;
  for (auto t : it->second.tasks) out.push_back(tasks_.at(t).task);
  return out;
}

std::vector<CrackedResult> Coordinator::results(JobId id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kUnknownJob, "unknown job " + std::to_string(id));
  auto out = it->second.results;
  std::stable_sort(out.begin(), out.end(),
                   [](const CrackedResult& a, const CrackedResult& b) { return a.at < b.at; });
  return out;
}

bool Coordinator::wait_for_terminal(JobId id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return job_cv_.wait_for(lock, timeout, [&] {
    auto it = jobs_.find(id);
    return it != jobs_.end() && is_terminal(it->second.job.status);
  });
}

JobStats Coordinator::job_statistics(JobId id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kUnknownJob, "unknown job " + std::to_string(id));
  const auto& js = it->second;
  JobStats s;
  s.job_id = id;
  s.status = js.job.status;
  s.cracked_count = js.cracked.size();
  s.total_hashes = js.job.hashes.size();
  s.recovery_pct = s.total_hashes ? 100.0 * static_cast<double>(s.cracked_count) /
                                         static_cast<double>(s.total_hashes)
                                   : 0.0;
  s.partial_results = js.job.partial_results;
  s.task_count = js.tasks.size();
  auto end = js.job.finished_at.value_or(clock_());
  s.elapsed_s = static_cast<double>(std::max<TimestampMs>(0, end - js.job.created_at)) / 1000.0;
  std::map<NodeId, NodeTaskStats> per;
  for (auto tid : js.tasks) {
    const auto& t = tasks_.at(tid).task;
    auto& n = per[t.node_id];
    n.node_id = t.node_id;
    n.tried += t.tried;
    if (t.status == TaskStatus::kRunning || n.speed_hps == 0.0) n.speed_hps = t.speed_hps;
  }
  for (auto& [node, n] : per) s.per_node.push_back(n);
  return s;
}

UsageStats Coordinator::usage_of(const std::vector<const Job*>& jobs) const {
  UsageStats u;
  for (auto st : {JobStatus::kCreated, JobStatus::kDistributing, JobStatus::kRunning,
                  JobStatus::kCompleted, JobStatus::kFailed})
    u.by_status[std::string(job_status_name(st))] = 0;
  for (const AttackMode& m : {AttackMode{BruteForce{}}, AttackMode{Dictionary{}},
                              AttackMode{RuleBased{}}, AttackMode{Combinator{}}})
    u.by_mode[std::string(mode_name(m))] = 0;
  for (auto a : kAllAlgorithms) u.by_algorithm[std::string(algorithm_name(a))] = 0;

  std::map<std::string, DailyActivity> days;
  for (const Job* j : jobs) {
    ++u.total_jobs;
    if (!is_terminal(j->status)) ++u.active_jobs;
    ++u.by_status[std::string(job_status_name(j->status))];
    auto mode = std::string(mode_name(j->mode));
    auto algo = std::string(algorithm_name(j->algorithm));
    ++u.by_mode[mode];
    ++u.by_algorithm[algo];
    auto& d = days[format_day(j->created_at)];
    ++d.jobs;
    ++d.by_mode[mode];
    ++d.by_algorithm[algo];
    u.cracked_total += jobs_.at(j->id).cracked.size();
  }
  auto share = [&](const std::map<std::string, std::size_t>& counts) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : counts)
      out[k] = u.total_jobs ? 100.0 * static_cast<double>(v) / static_cast<double>(u.total_jobs)
                            : 0.0;
    return out;
  };
  u.mode_share = share(u.by_mode);
  u.algorithm_share = share(u.by_algorithm);
  for (auto& [day, d] : days) {
    d.day = day;
    u.activity.push_back(std::move(d));
  }
  return u;
}

UserStats Coordinator::user_statistics(UserId user) const {
  auto record = store_.find_user(user);
  if (!record) throw Error(ErrorCode::kUnknownUser, "unknown user " + std::to_string(user));
  std::lock_guard lock(mu_);
  std::vector<const Job*> mine;
  for (const auto& [id, js] : jobs_)
    if (js.job.owner == user) mine.push_back(&js.job);
  return UserStats{user, record->username, usage_of(mine)};
}

AdminStats Coordinator::admin_statistics() const {
  auto users = store_.list_users().size();
  std::lock_guard lock(mu_);
  std::vector<const Job*> all;
  for (const auto& [id, js] : jobs_) all.push_back(&js.job);
  AdminStats s;
  s.usage = usage_of(all);
  s.user_count = users;
  for (const auto& [id, ns] : nodes_)
    s.nodes.push_back({ns.profile, ns.suspect_incidents, ns.active});
  return s;
}

// ------------------------------------------------------------------ ticker

Ticker::Ticker(Coordinator& coordinator, std::chrono::milliseconds period)
    : thread_([&coordinator, period](std::stop_token stop) {
        std::mutex m;
        std::condition_variable_any cv;
        std::unique_lock lock(m);
        while (!stop.stop_requested()) {
          cv.wait_for(lock, stop, period, [] { return false; });
          if (!stop.stop_requested()) coordinator.tick();
        }
      }) {}

}  // namespace crackmesh::coordinator
