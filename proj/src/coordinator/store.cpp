#include "crackmesh/coordinator/store.hpp"

#include <sqlite3.h>

#include <nlohmann/json.hpp>

#include "crackmesh/common/bigint.hpp"
#include "crackmesh/common/error.hpp"
#include "crackmesh/protocol/codec.hpp"

namespace crackmesh::coordinator {

using nlohmann::json;

std::string_view role_name(Role role) noexcept { return role == Role::kAdmin ? "admin" : "user"; }

std::optional<Role> parse_role(std::string_view name) noexcept {
  if (name == "admin") return Role::kAdmin;
  if (name == "user") return Role::kUser;
  return std::nullopt;
}

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS users (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  username TEXT NOT NULL UNIQUE,
  role TEXT NOT NULL,
  credential TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS tokens (
  token TEXT PRIMARY KEY,
  user_id INTEGER NOT NULL,
  expires_at INTEGER NOT NULL,
  revoked INTEGER NOT NULL DEFAULT 0);
CREATE TABLE IF NOT EXISTS nodes (
  node_id TEXT PRIMARY KEY,
  agent_name TEXT NOT NULL,
  os TEXT NOT NULL,
  arch TEXT NOT NULL,
  engine TEXT NOT NULL,
  power TEXT NOT NULL,
  last_seen INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS jobs (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  owner INTEGER NOT NULL,
  algorithm TEXT NOT NULL,
  attack TEXT NOT NULL,
  hashes TEXT NOT NULL,
  node_ids TEXT NOT NULL,
  status TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  finished_at INTEGER,
  partial INTEGER NOT NULL DEFAULT 0);
CREATE TABLE IF NOT EXISTS tasks (
  task_id INTEGER PRIMARY KEY,
  job_id INTEGER NOT NULL,
  node_id TEXT NOT NULL,
  payload TEXT NOT NULL,
  status TEXT NOT NULL,
  wave INTEGER NOT NULL,
  replaces INTEGER,
  tried INTEGER NOT NULL,
  speed REAL NOT NULL);
CREATE TABLE IF NOT EXISTS cracked (
  job_id INTEGER NOT NULL,
  hash TEXT NOT NULL,
  plaintext BLOB NOT NULL,
  node_id TEXT NOT NULL,
  at INTEGER NOT NULL,
  PRIMARY KEY (job_id, hash));
CREATE TABLE IF NOT EXISTS activity (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  at INTEGER NOT NULL,
  user_id INTEGER NOT NULL,
  job_id INTEGER NOT NULL,
  kind TEXT NOT NULL,
  mode TEXT NOT NULL,
  algorithm TEXT NOT NULL);
)sql";

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  throw Error(ErrorCode::kStorage, what + ": " + (db ? sqlite3_errmsg(db) : "no database"));
}

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail(db, "prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Statement& bind(int i, double v) {
    check(sqlite3_bind_double(stmt_, i, v));
    return *this;
  }
  Statement& bind(int i, std::string_view v) {
    check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind_blob(int i, std::string_view v) {
    check(sqlite3_bind_blob(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind_null(int i) {
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }

  /// True while a row is available.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step");
  }
  /// Runs to completion; returns the SQLite result code of the final step.
  int run() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_DONE || rc == SQLITE_CONSTRAINT) return rc;
    fail(db_, "step");
  }

  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  std::string text(int col) const {
    auto* p = reinterpret_cast<const char*>(sqlite3_column_blob(stmt_, col));
    int n = sqlite3_column_bytes(stmt_, col);
    return p ? std::string(p, static_cast<std::size_t>(n)) : std::string();
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(db_, "bind");
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

json power_to_json(const std::map<HashAlgorithm, double>& power) {
  json out = json::object();
  for (const auto& [algo, hps] : power) out[std::string(algorithm_name(algo))] = hps;
  return out;
}

std::map<HashAlgorithm, double> power_from_json(const json& j) {
  std::map<HashAlgorithm, double> out;
  for (const auto& [name, hps] : j.items())
    if (auto algo = parse_algorithm(name)) out[*algo] = hps.get<double>();
  return out;
}

json digests_to_json(const std::vector<HexDigest>& hashes) {
  json out = json::array();
  for (const auto& h : hashes) out.push_back(h.str());
  return out;
}

std::vector<HexDigest> digests_from_json(const json& j, HashAlgorithm algorithm) {
  std::vector<HexDigest> out;
  for (const auto& item : j) {
    auto d = HexDigest::parse(item.get<std::string>(), algorithm);
    if (!d) throw Error(ErrorCode::kStorage, "corrupt digest in store");
    out.push_back(*d);
  }
  return out;
}

json payload_to_json(const TaskPayload& payload) {
  json out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        out["hashes"] = digests_to_json(p.hashes);
        if constexpr (std::is_same_v<T, HashSlice>) {
          out["kind"] = "hashes";
        } else if constexpr (std::is_same_v<T, WordlistSlice>) {
          out["kind"] = "wordlists";
          out["wordlists"] = p.wordlists;
        } else {
          out["kind"] = "keyspace";
          out["start"] = to_decimal(p.start);
          out["end"] = to_decimal(p.end);
          out["length"] = p.length;
        }
      },
      payload);
  return out;
}

TaskPayload payload_from_json(const json& j, HashAlgorithm algorithm) {
  auto hashes = digests_from_json(j.at("hashes"), algorithm);
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "hashes") return HashSlice{std::move(hashes)};
  if (kind == "wordlists")
    return WordlistSlice{std::move(hashes), j.at("wordlists").get<std::vector<WordlistId>>()};
  BigInt start, end;
  if (!parse_decimal(j.at("start").get<std::string>(), start) ||
      !parse_decimal(j.at("end").get<std::string>(), end))
    throw Error(ErrorCode::kStorage, "corrupt keyspace bounds in store");
  return KeyspaceSlice{std::move(hashes), start, end, j.at("length").get<unsigned>()};
}

UserRecord read_user(const Statement& s) {
  UserRecord u;
  u.id = static_cast<UserId>(s.integer(0));
  u.username = s.text(1);
  u.role = parse_role(s.text(2)).value_or(Role::kUser);
  u.credential = s.text(3);
  return u;
}

}  // namespace

Store::Store(const std::string& path) {
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::kStorage, "cannot open store " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode=WAL;");
  exec("PRAGMA synchronous=FULL;");
  exec(kSchema);
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::kStorage, msg);
  }
}

UserId Store::create_user(const std::string& username, const std::string& credential,
                          Role role) {
  std::lock_guard lock(mu_);
  Statement s(db_, "INSERT INTO users (username, role, credential) VALUES (?, ?, ?)");
  s.bind(1, username).bind(2, role_name(role)).bind(3, credential);
  if (s.run() == SQLITE_CONSTRAINT)
    throw Error(ErrorCode::kConflict, "username already exists", "username");
  return static_cast<UserId>(sqlite3_last_insert_rowid(db_));
}

std::optional<UserRecord> Store::find_user(UserId id) const {
  std::lock_guard lock(mu_);
  Statement s(db_, "SELECT id, username, role, credential FROM users WHERE id = ?");
  s.bind(1, static_cast<std::int64_t>(id));
  if (!s.step()) return std::nullopt;
  return read_user(s);
}

std::optional<UserRecord> Store::find_user_by_name(const std::string& username) const {
  std::lock_guard lock(mu_);
  Statement s(db_, "SELECT id, username, role, credential FROM users WHERE username = ?");
  s.bind(1, username);
  if (!s.step()) return std::nullopt;
  return read_user(s);
}

std::vector<UserRecord> Store::list_users() const {
  std::lock_guard lock(mu_);
  Statement s(db_, "SELECT id, username, role, credential FROM users ORDER BY id");
  std::vector<UserRecord> out;
  while (s.step()) out.push_back(read_user(s));
  return out;
}

void Store::put_token(const TokenRecord& token) {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "INSERT OR REPLACE INTO tokens (token, user_id, expires_at, revoked) "
              "VALUES (?, ?, ?, ?)");
  s.bind(1, token.token)
      .bind(2, static_cast<std::int64_t>(token.user_id))
      .bind(3, token.expires_at)
      .bind(4, std::int64_t{token.revoked ? 1 : 0});
  s.run();
}

std::optional<TokenRecord> Store::find_token(const std::string& token) const {
  std::lock_guard lock(mu_);
  Statement s(db_, "SELECT token, user_id, expires_at, revoked FROM tokens WHERE token = ?");
  s.bind(1, token);
  if (!s.step()) return std::nullopt;
  return TokenRecord{s.text(0), static_cast<UserId>(s.integer(1)), s.integer(2),
                     s.integer(3) != 0};
}

void Store::revoke_token(const std::string& token) {
  std::lock_guard lock(mu_);
  Statement s(db_, "UPDATE tokens SET revoked = 1 WHERE token = ?");
  s.bind(1, token);
  s.run();
}

void Store::upsert_node(const NodeProfile& node) {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "INSERT OR REPLACE INTO nodes (node_id, agent_name, os, arch, engine, power, "
              "last_seen) VALUES (?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, node.node_id)
      .bind(2, node.agent_name)
      .bind(3, node.os)
      .bind(4, node.arch)
      .bind(5, engine_kind_name(node.engine_kind))
      .bind(6, power_to_json(node.power).dump())
      .bind(7, node.last_seen);
  s.run();
}

std::vector<NodeProfile> Store::load_nodes() const {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "SELECT node_id, agent_name, os, arch, engine, power, last_seen FROM nodes "
              "ORDER BY node_id");
  std::vector<NodeProfile> out;
  while (s.step()) {
    NodeProfile n;
    n.node_id = s.text(0);
    n.agent_name = s.text(1);
    n.os = s.text(2);
    n.arch = s.text(3);
    n.engine_kind = parse_engine_kind(s.text(4)).value_or(EngineKind::kBuiltin);
    n.power = power_from_json(json::parse(s.text(5)));
    n.last_seen = s.integer(6);
    n.connected = false;
    out.push_back(std::move(n));
  }
  return out;
}

JobId Store::insert_job(const Job& job) {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "INSERT INTO jobs (owner, algorithm, attack, hashes, node_ids, status, "
              "created_at, finished_at, partial) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, static_cast<std::int64_t>(job.owner))
      .bind(2, algorithm_name(job.algorithm))
      .bind(3, protocol::attack_to_json(job.mode).dump())
      .bind(4, digests_to_json(job.hashes).dump())
      .bind(5, json(job.requested_nodes).dump())
      .bind(6, job_status_name(job.status))
      .bind(7, job.created_at);
  if (job.finished_at)
    s.bind(8, *job.finished_at);
  else
    s.bind_null(8);
  s.bind(9, std::int64_t{job.partial_results ? 1 : 0});
  s.run();
  return static_cast<JobId>(sqlite3_last_insert_rowid(db_));
}

void Store::update_job(const Job& job) {
  std::lock_guard lock(mu_);
  Statement s(db_, "UPDATE jobs SET status = ?, finished_at = ?, partial = ? WHERE id = ?");
  s.bind(1, job_status_name(job.status));
  if (job.finished_at)
    s.bind(2, *job.finished_at);
  else
    s.bind_null(2);
  s.bind(3, std::int64_t{job.partial_results ? 1 : 0});
  s.bind(4, static_cast<std::int64_t>(job.id));
  s.run();
}

std::vector<Job> Store::load_jobs() const {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "SELECT id, owner, algorithm, attack, hashes, node_ids, status, created_at, "
              "finished_at, partial FROM jobs ORDER BY id");
  std::vector<Job> out;
  while (s.step()) {
    Job j;
    j.id = static_cast<JobId>(s.integer(0));
    j.owner = static_cast<UserId>(s.integer(1));
    j.algorithm = parse_algorithm(s.text(2)).value_or(HashAlgorithm::kMd5);
    j.mode = protocol::attack_from_json(json::parse(s.text(3)));
    j.hashes = digests_from_json(json::parse(s.text(4)), j.algorithm);
    j.requested_nodes = json::parse(s.text(5)).get<std::vector<NodeId>>();
    j.status = parse_job_status(s.text(6)).value_or(JobStatus::kFailed);
    j.created_at = s.integer(7);
    if (!s.is_null(8)) j.finished_at = s.integer(8);
    j.partial_results = s.integer(9) != 0;
    out.push_back(std::move(j));
  }
  return out;
}

void Store::upsert_task(const TaskAssignment& task) {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "INSERT OR REPLACE INTO tasks (task_id, job_id, node_id, payload, status, wave, "
              "replaces, tried, speed) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, static_cast<std::int64_t>(task.task_id))
      .bind(2, static_cast<std::int64_t>(task.job_id))
      .bind(3, task.node_id)
      .bind(4, payload_to_json(task.payload).dump())
      .bind(5, task_status_name(task.status))
      .bind(6, static_cast<std::int64_t>(task.wave));
  if (task.replaces)
    s.bind(7, static_cast<std::int64_t>(*task.replaces));
  else
    s.bind_null(7);
  s.bind(8, static_cast<std::int64_t>(task.tried)).bind(9, task.speed_hps);
  s.run();
}

std::vector<TaskAssignment> Store::load_tasks() const {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "SELECT t.task_id, t.job_id, t.node_id, t.payload, t.status, t.wave, t.replaces, "
              "t.tried, t.speed, j.algorithm FROM tasks t JOIN jobs j ON j.id = t.job_id "
              "ORDER BY t.task_id");
  std::vector<TaskAssignment> out;
  while (s.step()) {
    TaskAssignment t;
    t.task_id = static_cast<TaskId>(s.integer(0));
    t.job_id = static_cast<JobId>(s.integer(1));
    t.node_id = s.text(2);
    auto algo = parse_algorithm(s.text(9)).value_or(HashAlgorithm::kMd5);
    t.payload = payload_from_json(json::parse(s.text(3)), algo);
    t.status = parse_task_status(s.text(4)).value_or(TaskStatus::kLost);
    t.wave = static_cast<unsigned>(s.integer(5));
    if (!s.is_null(6)) t.replaces = static_cast<TaskId>(s.integer(6));
    t.tried = static_cast<std::uint64_t>(s.integer(7));
    t.speed_hps = s.real(8);
    out.push_back(std::move(t));
  }
  return out;
}

bool Store::insert_cracked(const CrackedResult& result) {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "INSERT OR IGNORE INTO cracked (job_id, hash, plaintext, node_id, at) "
              "VALUES (?, ?, ?, ?, ?)");
  s.bind(1, static_cast<std::int64_t>(result.job_id))
      .bind(2, result.hash.str())
      .bind_blob(3, result.plaintext)
      .bind(4, result.node_id)
      .bind(5, result.at);
  s.run();
  return sqlite3_changes(db_) > 0;
}

std::vector<CrackedResult> Store::load_cracked() const {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "SELECT c.job_id, c.hash, c.plaintext, c.node_id, c.at, j.algorithm FROM cracked c "
              "JOIN jobs j ON j.id = c.job_id ORDER BY c.at, c.job_id, c.hash");
  std::vector<CrackedResult> out;
  while (s.step()) {
    auto algo = parse_algorithm(s.text(5)).value_or(HashAlgorithm::kMd5);
    auto hash = HexDigest::parse(s.text(1), algo);
    if (!hash) throw Error(ErrorCode::kStorage, "corrupt digest in store");
    out.push_back({static_cast<JobId>(s.integer(0)), *hash, s.text(2), s.text(3), s.integer(4)});
  }
  return out;
}

void Store::append_activity(const ActivityEvent& event) {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "INSERT INTO activity (at, user_id, job_id, kind, mode, algorithm) "
              "VALUES (?, ?, ?, ?, ?, ?)");
  s.bind(1, event.at)
      .bind(2, static_cast<std::int64_t>(event.user_id))
      .bind(3, static_cast<std::int64_t>(event.job_id))
      .bind(4, event.kind)
      .bind(5, event.mode)
      .bind(6, event.algorithm);
  s.run();
}

std::vector<ActivityEvent> Store::load_activity() const {
  std::lock_guard lock(mu_);
  Statement s(db_,
              "SELECT at, user_id, job_id, kind, mode, algorithm FROM activity ORDER BY seq");
  std::vector<ActivityEvent> out;
  while (s.step())
    out.push_back({s.integer(0), static_cast<UserId>(s.integer(1)),
                   static_cast<JobId>(s.integer(2)), s.text(3), s.text(4), s.text(5)});
  return out;
}

}  // namespace crackmesh::coordinator
