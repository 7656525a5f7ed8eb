#include "crackmesh/cli/cli.hpp"

#include <signal.h>

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crackmesh/agent/agent.hpp"
#include "crackmesh/api/auth.hpp"
#include "crackmesh/api/service.hpp"
#include "crackmesh/common/error.hpp"
#include "crackmesh/coordinator/coordinator.hpp"
#include "crackmesh/coordinator/store.hpp"
#include "crackmesh/distribution/distribution.hpp"
#include "crackmesh/domain/wordlist.hpp"
#include "crackmesh/net/client.hpp"
#include "crackmesh/net/server.hpp"
#include "crackmesh/net/url.hpp"

namespace crackmesh::cli {

using nlohmann::json;

namespace {

/// Usage problem discovered after parsing; reported like a CLI11 error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string flag_for(const std::string& field) {
  std::string f = field;
  for (auto& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

/// Blocks SIGINT/SIGTERM for this thread and every thread it spawns later,
/// so `wait_for_interrupt` can collect them synchronously.
class InterruptGuard {
 public:
  InterruptGuard() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, &old_);
  }
  ~InterruptGuard() { pthread_sigmask(SIG_SETMASK, &old_, nullptr); }

  int wait() {
    int sig = 0;
    sigwait(&set_, &sig);
    return sig;
  }

 private:
  sigset_t set_{};
  sigset_t old_{};
};

void set_log_level(const std::string& level) {
  spdlog::set_level(spdlog::level::from_str(level));
}

/// Parses a URL flag, reporting problems against the flag.
net::Endpoint url_flag(const std::string& value, const std::string& flag, const char* scheme) {
  net::Endpoint ep;
  try {
    ep = net::parse_url(value);
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
  if (ep.scheme != scheme) throw UsageError(flag + ": expected a " + scheme + ":// URL");
  return ep;
}

std::string read_text_file(const std::string& path, const std::string& flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(flag + ": cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ------------------------------------------------------------------ coordinator

struct CoordinatorArgs {
  std::string listen = "0.0.0.0:8080";
  std::string store = "crackmesh.db";
  std::string wordlist_dir = "wordlists";
  std::string static_dir;
  std::string admin_user;
  std::string admin_password;
  unsigned threads = 4;
  std::string log_level = "info";
};

int run_coordinator(const CoordinatorArgs& a, std::ostream& out) {
  set_log_level(a.log_level);
  net::Endpoint ep;
  try {
    ep = net::parse_listen(a.listen);
  } catch (const Error& e) {
    throw UsageError(std::string("--listen: ") + e.what());
  }
  if (!std::filesystem::is_directory(a.wordlist_dir)) {
    throw UsageError("--wordlist-dir: '" + a.wordlist_dir + "' is not a directory");
  }
  if (!a.admin_user.empty() && a.admin_password.empty()) {
    throw UsageError("--admin-password is required with --admin-user");
  }
  InterruptGuard interrupts;
  coordinator::Store store(a.store);
  coordinator::Coordinator coord(store);
  coord.set_wordlists(scan_wordlist_dir(a.wordlist_dir));
  coord.recover();
  api::AuthService auth(store, api::AuthConfig::interactive());
  if (!a.admin_user.empty() && !store.find_user_by_name(a.admin_user)) {
    auth.create_user(a.admin_user, a.admin_password, coordinator::Role::kAdmin);
    spdlog::info("created admin user '{}'", a.admin_user);
  }
  api::ApiService service(coord, auth, {a.static_dir});
  coordinator::Ticker ticker(coord, std::chrono::seconds(1));
  net::Server server(coord, service, {ep.host, ep.port, a.threads});
  out << "coordinator listening on " << ep.host << ":" << server.port() << std::endl;
  int sig = interrupts.wait();
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return kExitOk;
}

// ------------------------------------------------------------------ agent

struct AgentArgs {
  std::string coordinator;
  std::string name;
  std::string engine = "builtin";
  std::string engine_path;
  std::string wordlist_dir = ".";
  std::vector<std::string> power;
  std::string log_level = "info";
};

int run_agent(const AgentArgs& a, std::ostream& out) {
  set_log_level(a.log_level);
  url_flag(a.coordinator, "--coordinator", "ws");
  agent::AgentConfig cfg;
  cfg.coordinator_url = a.coordinator;
  cfg.agent_name = a.name;
  cfg.engine_kind = *parse_engine_kind(a.engine);
  if (cfg.engine_kind == EngineKind::kExternal) {
    if (a.engine_path.empty()) throw UsageError("--engine-path is required with --engine external");
    cfg.external_engine_path = a.engine_path;
  }
  cfg.wordlist_dir = a.wordlist_dir;
  if (!a.power.empty()) {
    std::map<HashAlgorithm, double> power;
    for (const auto& item : a.power) {
      auto eq = item.find('=');
      auto algo = parse_algorithm(item.substr(0, eq));
      double hps = 0;
      if (eq != std::string::npos) {
        auto v = item.substr(eq + 1);
        auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), hps);
        if (ec != std::errc{} || end != v.data() + v.size()) hps = 0;
      }
      if (!algo || !(hps > 0)) throw UsageError("--power: expected algo=hps, got '" + item + "'");
      power[*algo] = hps;
    }
    cfg.advertised_power = std::move(power);
  }
  try {
    agent::validate(cfg);
  } catch (const Error& e) {
    throw UsageError(flag_for(e.field()) + ": " + e.what());
  }
  InterruptGuard interrupts;
  net::WebSocketConnector connector(a.coordinator);
  agent::Agent runtime(cfg, connector);
  std::jthread worker([&runtime](std::stop_token stop) { runtime.run(stop); });
  out << "agent " << a.name << " connecting to " << a.coordinator << std::endl;
  int sig = interrupts.wait();
  spdlog::info("signal {}, shutting down", sig);
  worker.request_stop();
  return kExitOk;
}

// ------------------------------------------------------------------ submit / login

struct SubmitArgs {
  std::string server = "http://127.0.0.1:8080";
  std::string token;
  std::string algorithm;
  std::string mode;
  std::string wordlists;
  std::vector<std::string> rules;
  std::string rules_file;
  unsigned min_len = 0;
  unsigned max_len = 0;
  std::string left;
  std::string right;
  std::string nodes;
  std::string hashes_file;
  std::string hashes;
};

json attack_of(const SubmitArgs& a) {
  auto need = [](bool present, const std::string& flag, const std::string& mode) {
    if (!present) throw UsageError(flag + " is required with --mode " + mode);
  };
  if (a.mode == "brute") {
    need(a.min_len > 0, "--min-len", a.mode);
    return {{"mode", "brute"}, {"min_len", a.min_len}, {"max_len", a.max_len ? a.max_len : a.min_len}};
  }
  if (a.mode == "combinator") {
    need(!a.left.empty(), "--left", a.mode);
    need(!a.right.empty(), "--right", a.mode);
    return {{"mode", "combinator"}, {"left", a.left}, {"right", a.right}};
  }
  need(!a.wordlists.empty(), "--wordlists", a.mode);
  json j = {{"mode", a.mode}, {"wordlists", split_list(a.wordlists)}};
  if (a.mode == "rules") {
    std::vector<std::string> rules = a.rules;
    if (!a.rules_file.empty()) {
      std::stringstream ss(read_text_file(a.rules_file, "--rules-file"));
      std::string line;
      while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) rules.push_back(line);
      }
    }
    need(!rules.empty(), "--rule or --rules-file", a.mode);
    j["rules"] = rules;
  }
  return j;
}

int report_api_error(const net::HttpResult& r, std::ostream& err) {
  auto body = json::parse(r.body, nullptr, false);
  err << "error: HTTP " << r.status;
  if (body.is_object()) {
    err << " " << body.value("code", "") << ": " << body.value("message", "");
    if (body.contains("field")) err << " (field " << body["field"].get<std::string>() << ")";
  }
  err << "\n";
  return kExitFailure;
}

int run_submit(const SubmitArgs& a, std::ostream& out, std::ostream& err) {
  url_flag(a.server, "--server", "http");
  if (a.hashes_file.empty() == a.hashes.empty()) {
    throw UsageError("exactly one of --hashes-file or --hashes is required");
  }
  json request = {{"algorithm", a.algorithm},
                  {"attack", attack_of(a)},
                  {"node_ids", split_list(a.nodes)}};
  std::map<std::string, std::string> headers{{"Authorization", "Bearer " + a.token}};
  std::string body;
  if (!a.hashes_file.empty()) {
    auto file = read_text_file(a.hashes_file, "--hashes-file");
    const std::string boundary = "crackmesh-boundary-7d0f3a";
    std::string name = std::filesystem::path(a.hashes_file).filename().string();
    body = "--" + boundary +
           "\r\nContent-Disposition: form-data; name=\"request\"\r\n"
           "Content-Type: application/json\r\n\r\n" +
           request.dump() + "\r\n--" + boundary +
           "\r\nContent-Disposition: form-data; name=\"hashes_file\"; filename=\"" + name +
           "\"\r\nContent-Type: text/plain\r\n\r\n" + file + "\r\n--" + boundary + "--\r\n";
    headers["Content-Type"] = "multipart/form-data; boundary=" + boundary;
  } else {
    request["hashes_text"] = a.hashes;
    body = request.dump();
    headers["Content-Type"] = "application/json";
  }
  auto r = net::http_request(a.server, "POST", "/jobs", headers, body);
  if (r.status != 201) return report_api_error(r, err);
  out << json::parse(r.body)["job_id"].get<JobId>() << "\n";
  return kExitOk;
}

struct LoginArgs {
  std::string server = "http://127.0.0.1:8080";
  std::string username;
  std::string password;
};

int run_login(const LoginArgs& a, std::ostream& out, std::ostream& err) {
  url_flag(a.server, "--server", "http");
  json body = {{"username", a.username}, {"password", a.password}};
  auto r = net::http_request(a.server, "POST", "/auth/login",
                             {{"Content-Type", "application/json"}}, body.dump());
  if (r.status != 200) return report_api_error(r, err);
  out << json::parse(r.body)["token"].get<std::string>() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ estimate

struct EstimateArgs {
  std::string mode;
  std::optional<unsigned> length;
  std::optional<std::uint64_t> lines;
  std::optional<std::uint64_t> rules;
  std::optional<std::uint64_t> left_lines;
  std::optional<std::uint64_t> right_lines;
  double hps = 0;
};

int run_estimate(const EstimateArgs& a, std::ostream& out) {
  auto need = [&](const auto& v, const char* flag) {
    if (!v) throw UsageError(std::string(flag) + " is required with --mode " + a.mode);
    return *v;
  };
  distribution::AttackSummary attack;
  if (a.mode == "brute") {
    attack = distribution::BruteEstimate{need(a.length, "--length")};
  } else if (a.mode == "dictionary") {
    attack = distribution::DictionaryEstimate{need(a.lines, "--lines")};
  } else if (a.mode == "rules") {
    attack = distribution::RulesEstimate{need(a.lines, "--lines"), need(a.rules, "--rules")};
  } else {
    attack = distribution::CombinatorEstimate{need(a.left_lines, "--left-lines"),
                                              need(a.right_lines, "--right-lines")};
  }
  double seconds = 0;
  try {
    seconds = distribution::estimate_time(attack, a.hps);
  } catch (const Error& e) {
    throw UsageError(std::string("--hps: ") + e.what());
  }
  out << format_seconds(seconds) << " s (" << humanize_duration(seconds) << ")\n";
  return kExitOk;
}

}  // namespace

std::string format_seconds(double seconds) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, seconds);
  return std::string(buf, end);
}

std::string humanize_duration(double seconds) {
  if (!std::isfinite(seconds)) return "forever";
  char buf[64];
  if (seconds < 1.0) {
    if (seconds < 0.001) return "<1ms";
    std::snprintf(buf, sizeof buf, "%.0fms", seconds * 1000.0);
    return buf;
  }
  constexpr double kYear = 365.25 * 86400.0;
  if (seconds >= 100 * kYear) {
    std::snprintf(buf, sizeof buf, "%.3g years", seconds / kYear);
    return buf;
  }
  if (seconds < 60.0) {
    std::snprintf(buf, sizeof buf, "%.2f", seconds);
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s + "s";
  }
  auto total = static_cast<std::uint64_t>(seconds);
  std::uint64_t parts[] = {total / 86400, total / 3600 % 24, total / 60 % 60, total % 60};
  const char* units[] = {"d", "h", "m", "s"};
  std::string out;
  for (int i = 0; i < 4; ++i) {
    if (parts[i] == 0) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(parts[i]) + units[i];
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed password-hash recovery: coordinator, agents and tooling.", "crackmesh"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CoordinatorArgs ca;
  auto* coord = app.add_subcommand("coordinator", "Run the coordinator service");
  coord->add_option("--listen", ca.listen, "host:port to serve HTTP and websockets on")
      ->capture_default_str();
  coord->add_option("--store", ca.store, "SQLite database file")->capture_default_str();
  coord->add_option("--wordlist-dir", ca.wordlist_dir, "Directory of wordlists; id = file stem")
      ->capture_default_str();
  coord->add_option("--static-dir", ca.static_dir, "Dashboard bundle served at /");
  coord->add_option("--admin-user", ca.admin_user, "Create this admin account if missing");
  coord->add_option("--admin-password", ca.admin_password, "Password for --admin-user")
      ->envname("CRACKMESH_ADMIN_PASSWORD");
  coord->add_option("--threads", ca.threads, "I/O threads")->capture_default_str()
      ->check(CLI::Range(1u, 256u));
  coord->add_option("--log-level", ca.log_level, "Log verbosity")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  AgentArgs aa;
  auto* agent = app.add_subcommand("agent", "Run a compute agent");
  agent->add_option("--coordinator", aa.coordinator, "ws://host:port/ws/agent")->required();
  agent->add_option("--name", aa.name, "Agent name, also its node id")->required();
  agent->add_option("--engine", aa.engine, "Cracking engine")
      ->capture_default_str()
      ->check(CLI::IsMember({"builtin", "external"}));
  agent->add_option("--engine-path", aa.engine_path, "External engine binary");
  agent->add_option("--wordlist-dir", aa.wordlist_dir, "Where wordlist ids resolve")
      ->capture_default_str();
  agent->add_option("--power", aa.power, "Advertised speed, e.g. md5=2.5e9 (repeatable)");
  agent->add_option("--log-level", aa.log_level, "Log verbosity")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  SubmitArgs sa;
  auto* submit = app.add_subcommand("submit", "Submit a job and print its id");
  submit->add_option("--server", sa.server, "http://host:port")->capture_default_str();
  submit->add_option("--token", sa.token, "Bearer token from `login`")
      ->required()
      ->envname("CRACKMESH_TOKEN");
  submit->add_option("--algorithm", sa.algorithm, "Hash algorithm")
      ->required()
      ->check(CLI::IsMember({"md5", "sha1", "sha256"}));
  submit->add_option("--mode", sa.mode, "Attack mode")
      ->required()
      ->check(CLI::IsMember({"brute", "dictionary", "rules", "combinator"}));
  submit->add_option("--wordlists", sa.wordlists, "Comma-separated wordlist ids");
  submit->add_option("--rule", sa.rules, "Rule line (repeatable)");
  submit->add_option("--rules-file", sa.rules_file, "File with one rule per line");
  submit->add_option("--min-len", sa.min_len, "Brute-force minimum length");
  submit->add_option("--max-len", sa.max_len, "Brute-force maximum length");
  submit->add_option("--left", sa.left, "Combinator left wordlist");
  submit->add_option("--right", sa.right, "Combinator right wordlist");
  submit->add_option("--nodes", sa.nodes, "Comma-separated node ids")->required();
  submit->add_option("--hashes-file", sa.hashes_file, "File with one digest per line");
  submit->add_option("--hashes", sa.hashes, "Digests inline, newline-separated");

  LoginArgs la;
  auto* login = app.add_subcommand("login", "Obtain a bearer token");
  login->add_option("--server", la.server, "http://host:port")->capture_default_str();
  login->add_option("--username", la.username, "Account name")->required();
  login->add_option("--password", la.password, "Account password")
      ->required()
      ->envname("CRACKMESH_PASSWORD");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Estimate attack time offline");
  estimate->add_option("--mode", ea.mode, "Attack mode")
      ->required()
      ->check(CLI::IsMember({"brute", "dictionary", "rules", "combinator"}));
  estimate->add_option("--length", ea.length, "Brute-force password length");
  estimate->add_option("--lines", ea.lines, "Wordlist line count");
  estimate->add_option("--rules", ea.rules, "Rule count");
  estimate->add_option("--left-lines", ea.left_lines, "Combinator left line count");
  estimate->add_option("--right-lines", ea.right_lines, "Combinator right line count");
  estimate->add_option("--hps", ea.hps, "Hashes per second, e.g. 1e6")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*coord) return run_coordinator(ca, out);
    if (*agent) return run_agent(aa, out);
    if (*submit) return run_submit(sa, out, err);
    if (*login) return run_login(la, out, err);
    return run_estimate(ea, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::kNetwork) return kExitNetwork;
    if (e.code() == ErrorCode::kInvalidArgument) return kExitUsage;
    return kExitFailure;
  }
}

}  // namespace crackmesh::cli
