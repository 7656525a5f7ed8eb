#include "crackmesh/api/service.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "crackmesh/common/error.hpp"
#include "crackmesh/common/hex.hpp"
#include "crackmesh/domain/hash_list.hpp"
#include "crackmesh/protocol/codec.hpp"

namespace crackmesh::api {

using nlohmann::json;
using coordinator::Role;

namespace {

HttpResponse json_response(int status, const json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump(-1, ' ', false, json::error_handler_t::replace);
  return r;
}

json parse_body(std::string_view body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kBadRequest, "body is not valid JSON", "body");
  if (!j.is_object()) throw Error(ErrorCode::kBadRequest, "body must be a JSON object", "body");
  return j;
}

std::string string_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a string", key);
  }
  return it->get<std::string>();
}

std::optional<std::uint64_t> parse_id(std::string_view text) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    auto slash = path.find('/', pos);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash > pos) out.emplace_back(path.substr(pos, slash - pos));
    pos = slash + 1;
  }
  return out;
}

bool is_api_root(const std::string& segment) {
  static const char* roots[] = {"auth", "nodes", "wordlists", "jobs", "stats", "admin", "ws"};
  for (const char* r : roots)
    if (segment == r) return true;
  return false;
}

std::string csv_field(std::string_view raw) {
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

json task_json(const TaskAssignment& t) {
  json j = {{"task_id", t.task_id},       {"node_id", t.node_id},
            {"status", task_status_name(t.status)},
            {"wave", t.wave},             {"tried", t.tried},
            {"speed_hps", t.speed_hps},   {"hash_count", payload_hashes(t.payload).size()}};
  j["replaces"] = t.replaces ? json(*t.replaces) : json(nullptr);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, HashSlice>) {
          j["kind"] = "hashes";
        } else if constexpr (std::is_same_v<P, WordlistSlice>) {
          j["kind"] = "wordlists";
          j["wordlists"] = p.wordlists;
        } else {
          j["kind"] = "keyspace";
          j["keyspace"] = {{"length", p.length}, {"start", p.start.str()}, {"end", p.end.str()}};
        }
      },
      t.payload);
  return j;
}

json result_json(const CrackedResult& r) {
  return {{"hash", r.hash.str()},
          {"plaintext", escape_bytes(r.plaintext)},
          {"plaintext_hex", hex_encode(r.plaintext)},
          {"node_id", r.node_id},
          {"cracked_at", format_iso8601(r.at)}};
}

json user_json(const coordinator::UserRecord& u) {
  return {{"id", u.id}, {"username", u.username}, {"role", coordinator::role_name(u.role)}};
}

std::string content_type_for(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(p, ec)) return std::nullopt;
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Error method_not_allowed() {
  return Error(ErrorCode::kMethodNotAllowed, "method not allowed for this route");
}

Error not_found() { return Error(ErrorCode::kNotFound, "no such route"); }

}  // namespace

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kForbidden: return 403;
    case ErrorCode::kUnknownJob:
    case ErrorCode::kUnknownUser:
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kMethodNotAllowed: return 405;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kBadRequest:
    case ErrorCode::kMalformedFrame: return 400;
    case ErrorCode::kStorage:
    case ErrorCode::kSpawnFailure:
    case ErrorCode::kFileUnreadable: return 500;
    default: return 422;
  }
}

HttpResponse error_response(const std::exception& error) {
  json body;
  int status = 500;
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    status = http_status_for(e->code());
    body["code"] = error_code_name(e->code());
    body["message"] = e->what();
    if (!e->field().empty()) body["field"] = e->field();
    if (e->line()) body["line"] = *e->line();
  } else {
    body["code"] = "internal_error";
    body["message"] = error.what();
  }
  return json_response(status, body);
}

std::string export_csv(const std::vector<CrackedResult>& results) {
  std::vector<const CrackedResult*> sorted;
  for (const auto& r : results) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return a->at < b->at; });
  std::string out = "hash,plaintext,cracked_at,node\n";
  for (const auto* r : sorted) {
    out += r->hash.str();
    out += ',';
    out += csv_field(escape_bytes(r->plaintext));
    out += ',';
    out += format_iso8601(r->at);
    out += ',';
    out += r->node_id;
    out += '\n';
  }
  return out;
}

json node_json(const NodeProfile& node) {
  json power = json::object();
  for (const auto& [algo, hps] : node.power) power[std::string(algorithm_name(algo))] = hps;
  return {{"id", node.node_id},
          {"name", node.agent_name},
          {"os", node.os},
          {"arch", node.arch},
          {"engine", engine_kind_name(node.engine_kind)},
          {"power", power},
          {"connected", node.connected},
          {"last_seen", format_iso8601(node.last_seen)}};
}

json job_json(const Job& job, const coordinator::JobStats& stats) {
  json per_node = json::array();
  for (const auto& n : stats.per_node)
    per_node.push_back({{"node_id", n.node_id}, {"tried", n.tried}, {"speed_hps", n.speed_hps}});
  return {{"id", job.id},
          {"owner", job.owner},
          {"algorithm", algorithm_name(job.algorithm)},
          {"mode", mode_name(job.mode)},
          {"attack", protocol::attack_to_json(job.mode)},
          {"node_ids", job.requested_nodes},
          {"status", job_status_name(job.status)},
          {"created_at", format_iso8601(job.created_at)},
          {"finished_at", job.finished_at ? json(format_iso8601(*job.finished_at)) : json(nullptr)},
          {"partial_results", job.partial_results},
          {"stats",
           {{"cracked_count", stats.cracked_count},
            {"total_hashes", stats.total_hashes},
            {"recovery_pct", stats.recovery_pct},
            {"elapsed_s", stats.elapsed_s},
            {"task_count", stats.task_count},
            {"per_node", per_node}}}};
}

json usage_json(const coordinator::UsageStats& u) {
  json activity = json::array();
  for (const auto& d : u.activity)
    activity.push_back({{"day", d.day},
                        {"jobs", d.jobs},
                        {"by_mode", d.by_mode},
                        {"by_algorithm", d.by_algorithm}});
  return {{"total_jobs", u.total_jobs},   {"active_jobs", u.active_jobs},
          {"by_status", u.by_status},     {"by_mode", u.by_mode},
          {"by_algorithm", u.by_algorithm}, {"mode_share", u.mode_share},
          {"algorithm_share", u.algorithm_share}, {"activity", activity},
          {"cracked_total", u.cracked_total}};
}

ApiService::ApiService(coordinator::Coordinator& coordinator, AuthService& auth, ApiConfig config)
    : coordinator_(coordinator), auth_(auth), config_(std::move(config)) {}

HttpResponse ApiService::handle(const HttpRequest& request) const {
  try {
    return route(request);
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

Principal ApiService::require_auth(const HttpRequest& request) const {
  auto header = request.header("authorization");
  if (!header) throw Error(ErrorCode::kUnauthorized, "missing bearer token");
  std::string_view h = *header;
  constexpr std::string_view prefix = "Bearer ";
  if (h.size() <= prefix.size() || h.substr(0, prefix.size()) != prefix) {
    throw Error(ErrorCode::kUnauthorized, "malformed authorization header");
  }
  return auth_.authenticate(h.substr(prefix.size()));
}

Job ApiService::owned_job(const Principal& who, const std::string& id_text) const {
  auto id = parse_id(id_text);
  std::optional<Job> job;
  if (id) job = coordinator_.job(*id);
  if (!job) throw Error(ErrorCode::kUnknownJob, "unknown job " + id_text);
  if (!who.admin() && job->owner != who.id) {
    throw Error(ErrorCode::kForbidden, "job belongs to another user");
  }
  return *job;
}

JobId ApiService::authorize_ui(const HttpRequest& request) const {
  Principal who;
  if (auto token = request.query("token")) {
    who = auth_.authenticate(*token);
  } else {
    who = require_auth(request);
  }
  auto job = request.query("job");
  if (!job) throw Error(ErrorCode::kInvalidArgument, "job query parameter is required", "job");
  return owned_job(who, *job).id;
}

HttpResponse ApiService::route(const HttpRequest& request) const {
  auto seg = split_path(request.path());
  const auto& method = request.method;
  bool get = method == "GET" || method == "HEAD";
  bool post = method == "POST";

  if (seg.empty() || !is_api_root(seg[0])) {
    if (get) return serve_static(request);
    throw not_found();
  }

  if (seg.size() == 2 && seg[0] == "auth" && seg[1] == "login") {
    if (!post) throw method_not_allowed();
    auto body = parse_body(request.body);
    auto result = auth_.login(string_field(body, "username"), string_field(body, "password"));
    return json_response(200, {{"token", result.token},
                               {"user_id", result.principal.id},
                               {"username", result.principal.username},
                               {"role", coordinator::role_name(result.principal.role)},
                               {"expires_at", format_iso8601(result.expires_at)}});
  }

  Principal who = require_auth(request);

  if (seg[0] == "auth" && seg.size() == 2) {
    if (seg[1] == "logout") {
      if (!post) throw method_not_allowed();
      auth_.revoke(request.header("authorization")->substr(7));
      return json_response(200, json::object());
    }
    if (seg[1] == "me") {
      if (!get) throw method_not_allowed();
      return json_response(200, {{"id", who.id},
                                 {"username", who.username},
                                 {"role", coordinator::role_name(who.role)}});
    }
  }

  if (seg[0] == "nodes" && seg.size() == 1) {
    if (!get) throw method_not_allowed();
    json out = json::array();
    for (const auto& n : coordinator_.nodes()) out.push_back(node_json(n));
    return json_response(200, out);
  }

  if (seg[0] == "wordlists" && seg.size() == 1) {
    if (!get) throw method_not_allowed();
    json out = json::array();
    for (const auto& w : coordinator_.wordlists())
      out.push_back({{"id", w.id}, {"line_count", w.line_count}, {"byte_size", w.byte_size}});
    return json_response(200, out);
  }

  if (seg[0] == "jobs") {
    if (seg.size() == 1) {
      if (post) return submit(who, request);
      if (!get) throw method_not_allowed();
      json out = json::array();
      for (const auto& j : coordinator_.jobs()) {
        if (!who.admin() && j.owner != who.id) continue;
        out.push_back(job_json(j, coordinator_.job_statistics(j.id)));
      }
      return json_response(200, out);
    }
    if (seg.size() == 2) {
      if (!get) throw method_not_allowed();
      auto job = owned_job(who, seg[1]);
      auto body = job_json(job, coordinator_.job_statistics(job.id));
      json hashes = json::array();
      for (const auto& h : job.hashes) hashes.push_back(h.str());
      body["hashes"] = hashes;
      json tasks = json::array();
      for (const auto& t : coordinator_.tasks(job.id)) tasks.push_back(task_json(t));
      body["tasks"] = tasks;
      return json_response(200, body);
    }
    if (seg.size() == 3 && (seg[2] == "results" || seg[2] == "results.csv")) {
      if (!get) throw method_not_allowed();
      auto job = owned_job(who, seg[1]);
      auto results = coordinator_.results(job.id);
      if (seg[2] == "results") {
        json out = json::array();
        for (const auto& r : results) out.push_back(result_json(r));
        return json_response(200, out);
      }
      HttpResponse r;
      r.content_type = "text/csv; charset=utf-8";
      r.headers["Content-Disposition"] =
          "attachment; filename=\"job-" + std::to_string(job.id) + ".csv\"";
      r.body = export_csv(results);
      return r;
    }
  }

  if (seg[0] == "stats" && seg.size() == 2 && seg[1] == "me") {
    if (!get) throw method_not_allowed();
    auto s = coordinator_.user_statistics(who.id);
    return json_response(200,
                         {{"user_id", s.user_id}, {"username", s.username}, {"usage", usage_json(s.usage)}});
  }

  if (seg[0] == "admin" && seg.size() == 2 && (seg[1] == "stats" || seg[1] == "users")) {
    if (!who.admin()) throw Error(ErrorCode::kForbidden, "admin role required");
    if (seg[1] == "stats") {
      if (!get) throw method_not_allowed();
      auto s = coordinator_.admin_statistics();
      json nodes = json::array();
      for (const auto& n : s.nodes) {
        auto j = node_json(n.profile);
        j["suspect_incidents"] = n.suspect_incidents;
        j["current_task"] = n.current_task ? json(*n.current_task) : json(nullptr);
        nodes.push_back(j);
      }
      return json_response(200, {{"usage", usage_json(s.usage)},
                                 {"user_count", s.user_count},
                                 {"nodes", nodes}});
    }
    if (get) {
      json out = json::array();
      for (const auto& u : auth_.users()) out.push_back(user_json(u));
      return json_response(200, out);
    }
    if (!post) throw method_not_allowed();
    auto body = parse_body(request.body);
    auto role = Role::kUser;
    if (auto it = body.find("role"); it != body.end()) {
      auto parsed = it->is_string() ? coordinator::parse_role(it->get<std::string>()) : std::nullopt;
      if (!parsed) throw Error(ErrorCode::kInvalidArgument, "role must be user or admin", "role");
      role = *parsed;
    }
    auto id = auth_.create_user(string_field(body, "username"), string_field(body, "password"), role);
    return json_response(201, user_json(*auth_.user(id)));
  }

  throw not_found();
}

HttpResponse ApiService::submit(const Principal& who, const HttpRequest& request) const {
  json body;
  std::optional<std::string> file_text;
  auto ctype = request.header("content-type").value_or("application/json");
  if (auto boundary = multipart_boundary(ctype)) {
    for (auto& part : parse_multipart(request.body, *boundary)) {
      if (part.name == "request") {
        body = parse_body(part.body);
      } else if (part.name == "hashes_file" || part.filename) {
        file_text = std::move(part.body);
      }
    }
    if (body.is_null()) {
      throw Error(ErrorCode::kBadRequest, "multipart body needs a 'request' JSON part", "request");
    }
  } else {
    body = parse_body(request.body);
  }

  JobRequest req;
  req.owner = who.id;
  auto algo = parse_algorithm(string_field(body, "algorithm"));
  if (!algo) throw Error(ErrorCode::kInvalidArgument, "algorithm must be md5, sha1 or sha256", "algorithm");
  req.algorithm = *algo;

  if (body.contains("attack")) {
    req.mode = protocol::attack_from_json(body["attack"], "attack");
  } else if (body.contains("mode")) {
    req.mode = protocol::attack_from_json(body, "attack");
  } else {
    throw Error(ErrorCode::kSchemaViolation, "attack is required", "attack");
  }

  auto nodes = body.find("node_ids");
  if (nodes == body.end() || !nodes->is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "node_ids must be an array of node ids", "node_ids");
  }
  for (const auto& n : *nodes) {
    if (!n.is_string()) throw Error(ErrorCode::kSchemaViolation, "node_ids must be strings", "node_ids");
    req.requested_nodes.push_back(n.get<std::string>());
  }

  std::string text;
  if (file_text) {
    text = *file_text;
  } else if (auto it = body.find("hashes"); it != body.end()) {
    if (!it->is_array()) throw Error(ErrorCode::kSchemaViolation, "hashes must be an array", "hashes");
    for (const auto& h : *it) {
      if (!h.is_string()) throw Error(ErrorCode::kSchemaViolation, "hashes must be strings", "hashes");
      text += h.get<std::string>();
      text += '\n';
    }
  } else if (auto it = body.find("hashes_text"); it != body.end()) {
    if (!it->is_string()) throw Error(ErrorCode::kSchemaViolation, "hashes_text must be a string", "hashes");
    text = it->get<std::string>();
  }
  try {
    req.hashes = parse_hash_list(text, req.algorithm);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), "hashes", e.line());
  }

  auto job = coordinator_.submit_job(req);
  return json_response(201, {{"job_id", job.id}, {"status", job_status_name(job.status)}});
}

HttpResponse ApiService::serve_static(const HttpRequest& request) const {
  if (config_.static_dir.empty()) throw not_found();
  std::string rel(request.path());
  while (!rel.empty() && rel.front() == '/') rel.erase(0, 1);
  std::filesystem::path p = std::filesystem::path(rel).lexically_normal();
  if (!p.empty() && (p.is_absolute() || *p.begin() == "..")) throw not_found();
  std::optional<std::string> content;
  std::filesystem::path served;
  if (!rel.empty()) {
    served = config_.static_dir / p;
    content = read_file(served);
  }
  if (!content && !p.has_extension()) {
    served = config_.static_dir / "index.html";
    content = read_file(served);
  }
  if (!content) throw not_found();
  HttpResponse r;
  r.content_type = content_type_for(served);
  if (request.method != "HEAD") r.body = std::move(*content);
  return r;
}

}  // namespace crackmesh::api
