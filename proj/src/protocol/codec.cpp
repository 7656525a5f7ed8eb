#include "crackmesh/protocol/codec.hpp"

#include <limits>

#include "crackmesh/common/error.hpp"
#include "crackmesh/common/hex.hpp"

namespace crackmesh::protocol {
namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, "field '" + field + "' " + what, field);
}

std::string path(const std::string& prefix, const char* key) {
  return prefix.empty() ? std::string(key) : prefix + "." + key;
}

const json& require(const json& obj, const char* key, const std::string& prefix = {}) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(path(prefix, key), "is missing");
  return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& prefix = {}) {
  const auto& v = require(obj, key, prefix);
  if (!v.is_string()) schema(path(prefix, key), "must be a string");
  return v.get<std::string>();
}

std::uint64_t get_uint(const json& obj, const char* key, const std::string& prefix = {}) {
  const auto& v = require(obj, key, prefix);
  if (!v.is_number_unsigned()) schema(path(prefix, key), "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

int get_int(const json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number_integer()) schema(key, "must be an integer");
  auto n = v.get<std::int64_t>();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
    schema(key, "is out of range");
  }
  return static_cast<int>(n);
}

double get_number(const json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number()) schema(key, "must be a number");
  return v.get<double>();
}

std::vector<std::string> get_string_list(const json& obj, const char* key,
                                         const std::string& prefix = {}) {
  const auto& v = require(obj, key, prefix);
  if (!v.is_array()) schema(path(prefix, key), "must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) schema(path(prefix, key), "must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

BigInt get_decimal(const json& obj, const char* key, const std::string& prefix) {
  const auto& v = require(obj, key, prefix);
  BigInt out;
  if (!v.is_string() || !parse_decimal(v.get_ref<const std::string&>(), out)) {
    schema(path(prefix, key), "must be a decimal string");
  }
  return out;
}

HashAlgorithm get_algorithm(const json& obj, const char* key) {
  auto name = get_string(obj, key);
  auto algo = parse_algorithm(name);
  if (!algo) schema(key, "names an unsupported algorithm");
  return *algo;
}

unsigned get_length(const json& obj, const char* key, const std::string& prefix) {
  auto n = get_uint(obj, key, prefix);
  if (n > std::numeric_limits<unsigned>::max()) schema(path(prefix, key), "is out of range");
  return static_cast<unsigned>(n);
}

std::optional<TaskOutcome> parse_outcome(std::string_view name) {
  for (auto o : {TaskOutcome::kAllCracked, TaskOutcome::kExhausted, TaskOutcome::kFailed}) {
    if (outcome_name(o) == name) return o;
  }
  return std::nullopt;
}

bool is_digest_length(std::size_t n) { return n == 32 || n == 40 || n == 64; }

struct Encoder {
  json operator()(const Register& m) const {
    json bench = json::object();
    for (const auto& [algo, hps] : m.benchmark) bench[std::string(algorithm_name(algo))] = hps;
    return {{"type", "register"},       {"v", m.v},       {"agent_name", m.agent_name},
            {"os", m.os},               {"arch", m.arch}, {"engine", engine_kind_name(m.engine)},
            {"benchmark", bench}};
  }
  json operator()(const RegisterAck& m) const {
    return {{"type", "register_ack"}, {"v", m.v}, {"node_id", m.node_id}};
  }
  json operator()(const TaskAssign& m) const {
    json hashes = json::array();
    for (const auto& h : m.hashes) hashes.push_back(h.str());
    json out{{"type", "task_assign"},
             {"task_id", m.task_id},
             {"job_id", m.job_id},
             {"algorithm", algorithm_name(m.algorithm)},
             {"attack", attack_to_json(m.attack)},
             {"hashes", hashes}};
    if (m.keyspace) {
      out["keyspace"] = {{"length", m.keyspace->length},
                         {"start", to_decimal(m.keyspace->start)},
                         {"end", to_decimal(m.keyspace->end)}};
    }
    if (m.wordlists) out["wordlists"] = *m.wordlists;
    if (m.rules) out["rules"] = *m.rules;
    return out;
  }
  json operator()(const TaskAccept& m) const {
    return {{"type", "task_accept"}, {"task_id", m.task_id}};
  }
  json operator()(const Progress& m) const {
    return {{"type", "progress"}, {"task_id", m.task_id}, {"tried", m.tried},
            {"speed_hps", m.speed_hps}};
  }
  json operator()(const Cracked& m) const {
    return {{"type", "cracked"}, {"task_id", m.task_id}, {"hash", m.hash},
            {"plaintext_hex", hex_encode(m.plaintext)}};
  }
  json operator()(const TaskDone& m) const {
    json out{{"type", "task_done"}, {"task_id", m.task_id}, {"outcome", outcome_name(m.outcome)}};
    if (m.detail) out["detail"] = *m.detail;
    return out;
  }
  json operator()(const ErrorMessage& m) const {
    return {{"type", "error"}, {"code", m.code}, {"message", m.message}};
  }
  json operator()(const Ping&) const { return {{"type", "ping"}}; }
  json operator()(const Pong&) const { return {{"type", "pong"}}; }
};

Register decode_register(const json& j) {
  Register m;
  m.v = get_int(j, "v");
  m.agent_name = get_string(j, "agent_name");
  m.os = get_string(j, "os");
  m.arch = get_string(j, "arch");
  auto engine = parse_engine_kind(get_string(j, "engine"));
  if (!engine) schema("engine", "must be \"builtin\" or \"external\"");
  m.engine = *engine;
  const auto& bench = require(j, "benchmark");
  if (!bench.is_object()) schema("benchmark", "must be an object");
  for (const auto& [name, hps] : bench.items()) {
    auto algo = parse_algorithm(name);
    if (!algo) schema("benchmark." + name, "names an unsupported algorithm");
    if (!hps.is_number()) schema("benchmark." + name, "must be a number");
    m.benchmark[*algo] = hps.get<double>();
  }
  return m;
}

TaskAssign decode_task_assign(const json& j) {
  TaskAssign m;
  m.task_id = get_uint(j, "task_id");
  m.job_id = get_uint(j, "job_id");
  m.algorithm = get_algorithm(j, "algorithm");
  const auto& attack = require(j, "attack");
  m.attack = attack_from_json(attack, "attack");
  const auto& hashes = require(j, "hashes");
  if (!hashes.is_array()) schema("hashes", "must be an array of digests");
  for (const auto& h : hashes) {
    if (!h.is_string()) schema("hashes", "must be an array of digests");
    auto d = HexDigest::parse(h.get_ref<const std::string&>(), m.algorithm);
    if (!d) schema("hashes", "contains an invalid digest");
    m.hashes.push_back(*d);
  }
  if (auto it = j.find("keyspace"); it != j.end()) {
    if (!it->is_object()) schema("keyspace", "must be an object");
    KeyspaceBounds ks;
    ks.length = get_length(*it, "length", "keyspace");
    ks.start = get_decimal(*it, "start", "keyspace");
    ks.end = get_decimal(*it, "end", "keyspace");
    m.keyspace = std::move(ks);
  }
  if (j.contains("wordlists")) m.wordlists = get_string_list(j, "wordlists");
  if (j.contains("rules")) m.rules = get_string_list(j, "rules");
  return m;
}

Cracked decode_cracked(const json& j) {
  Cracked m;
  m.task_id = get_uint(j, "task_id");
  m.hash = get_string(j, "hash");
  if (!is_digest_length(m.hash.size()) || !hex_decode(m.hash)) {
    schema("hash", "must be a hex digest");
  }
  for (auto& c : m.hash) {
    if (c >= 'A' && c <= 'F') c = static_cast<char>(c - 'A' + 'a');
  }
  auto plain = hex_decode(get_string(j, "plaintext_hex"));
  if (!plain) schema("plaintext_hex", "must be hex");
  m.plaintext = std::move(*plain);
  return m;
}

TaskDone decode_task_done(const json& j) {
  TaskDone m;
  m.task_id = get_uint(j, "task_id");
  auto outcome = parse_outcome(get_string(j, "outcome"));
  if (!outcome) schema("outcome", "must be all_cracked, exhausted or failed");
  m.outcome = *outcome;
  if (j.contains("detail")) m.detail = get_string(j, "detail");
  return m;
}

}  // namespace

std::string_view outcome_name(TaskOutcome outcome) noexcept {
  switch (outcome) {
    case TaskOutcome::kAllCracked: return "all_cracked";
    case TaskOutcome::kExhausted: return "exhausted";
    case TaskOutcome::kFailed: return "failed";
  }
  return "";
}

std::string_view message_type(const Message& message) noexcept {
  static constexpr std::string_view kNames[] = {"register",    "register_ack", "task_assign",
                                                "task_accept", "progress",     "cracked",
                                                "task_done",   "error",        "ping",
                                                "pong"};
  return kNames[message.index()];
}

json attack_to_json(const AttackMode& mode) {
  struct Visitor {
    json operator()(const BruteForce& b) const {
      return {{"mode", "brute"}, {"min_len", b.min_len}, {"max_len", b.max_len}};
    }
    json operator()(const Dictionary& d) const {
      return {{"mode", "dictionary"}, {"wordlists", d.wordlists}};
    }
    json operator()(const RuleBased& r) const {
      return {{"mode", "rules"}, {"wordlists", r.wordlists}, {"rules", r.rules}};
    }
    json operator()(const Combinator& c) const {
      return {{"mode", "combinator"}, {"left", c.left}, {"right", c.right}};
    }
  };
  return std::visit(Visitor{}, mode);
}

AttackMode attack_from_json(const json& object, const std::string& field) {
  if (!object.is_object()) schema(field, "must be an object");
  auto mode = get_string(object, "mode", field);
  if (mode == "brute") {
    return BruteForce{get_length(object, "min_len", field), get_length(object, "max_len", field)};
  }
  if (mode == "dictionary") return Dictionary{get_string_list(object, "wordlists", field)};
  if (mode == "rules") {
    return RuleBased{get_string_list(object, "wordlists", field),
                     get_string_list(object, "rules", field)};
  }
  if (mode == "combinator") {
    return Combinator{get_string(object, "left", field), get_string(object, "right", field)};
  }
  schema(field + ".mode", "must be brute, dictionary, rules or combinator");
}

std::string encode(const Message& message) {
  return std::visit(Encoder{}, message).dump(-1, ' ', false, json::error_handler_t::replace);
}

Message decode(std::string_view frame) {
  auto j = json::parse(frame, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kMalformedFrame, "frame is not valid JSON", "frame");
  if (!j.is_object()) throw Error(ErrorCode::kMalformedFrame, "frame is not a JSON object", "frame");
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    throw Error(ErrorCode::kMalformedFrame, "frame has no string 'type' field", "type");
  }
  const auto& type = type_it->get_ref<const std::string&>();

  try {
    if (type == "register") return decode_register(j);
    if (type == "register_ack") return RegisterAck{get_int(j, "v"), get_string(j, "node_id")};
    if (type == "task_assign") return decode_task_assign(j);
    if (type == "task_accept") return TaskAccept{get_uint(j, "task_id")};
    if (type == "progress") {
      return Progress{get_uint(j, "task_id"), get_uint(j, "tried"), get_number(j, "speed_hps")};
    }
    if (type == "cracked") return decode_cracked(j);
    if (type == "task_done") return decode_task_done(j);
    if (type == "error") return ErrorMessage{get_string(j, "code"), get_string(j, "message")};
    if (type == "ping") return Ping{};
    if (type == "pong") return Pong{};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what(), "frame");
  }
  throw Error(ErrorCode::kUnknownType, "unknown message type '" + type + "'", "type");
}

}  // namespace crackmesh::protocol
