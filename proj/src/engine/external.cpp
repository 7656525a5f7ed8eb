#include "crackmesh/engine/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "crackmesh/common/error.hpp"
#include "crackmesh/common/hex.hpp"
#include "crackmesh/engine/digest.hpp"

extern char** environ;

namespace crackmesh::engine {
namespace {

using nlohmann::json;

[[noreturn]] void parse_failure(std::string_view line) {
  throw Error(ErrorCode::kParseFailure,
              "unrecognised cracker output: " + std::string(line.substr(0, 120)), "stdout");
}

std::filesystem::path scratch_dir(const ExternalEngineConfig& config) {
  return config.work_dir.empty() ? std::filesystem::temp_directory_path() : config.work_dir;
}

std::string unique_stem() {
  static std::atomic<unsigned> counter{0};
  return "crackmesh-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
}

/// Removes the scratch files when the attack ends.
struct ScratchFiles {
  std::filesystem::path hashes;
  std::filesystem::path rules;
  ~ScratchFiles() {
    std::error_code ec;
    std::filesystem::remove(hashes, ec);
    std::filesystem::remove(rules, ec);
  }
};

}  // namespace

int external_hash_mode(HashAlgorithm algorithm) noexcept {
  switch (algorithm) {
    case HashAlgorithm::kMd5: return 0;
    case HashAlgorithm::kSha1: return 100;
    case HashAlgorithm::kSha256: return 1400;
  }
  return 0;
}

std::vector<std::string> build_external_command(const EngineTask& task,
                                                const ExternalEngineConfig& config,
                                                const std::filesystem::path& hash_file,
                                                const std::filesystem::path& rule_file) {
  std::vector<std::string> argv{config.binary_path,
                                "-m",
                                std::to_string(external_hash_mode(task.algorithm)),
                                "--quiet",
                                "--potfile-disable",
                                "--status",
                                "--status-json",
                                "--status-timer=1",
                                "--outfile-format=1,3"};
  argv.insert(argv.end(), config.extra_args.begin(), config.extra_args.end());

  struct Visitor {
    std::vector<std::string>& argv;
    const std::filesystem::path& hash_file;
    const std::filesystem::path& rule_file;

    void operator()(const WordlistGenerator& g) const {
      argv.insert(argv.end(), {"-a", "0", hash_file.string()});
      for (const auto& p : g.paths) argv.push_back(p.string());
    }
    void operator()(const RulesGenerator& g) const {
      argv.insert(argv.end(), {"-a", "0", "-r", rule_file.string(), hash_file.string()});
      for (const auto& p : g.paths) argv.push_back(p.string());
    }
    void operator()(const CombinatorGenerator& g) const {
      argv.insert(argv.end(), {"-a", "1", hash_file.string(), g.left.string(), g.right.string()});
    }
    void operator()(const BruteGenerator& g) const {
      std::string mask;
      for (unsigned i = 0; i < g.range.length; ++i) mask += "?a";
      argv.insert(argv.end(), {"-a", "3"});
      const bool partial = g.range.start != 0 || g.range.end != keyspace_size(g.range.length);
      if (partial) {
        argv.push_back("--skip=" + to_decimal(g.range.start));
        argv.push_back("--limit=" + to_decimal(g.range.size()));
      }
      argv.push_back(hash_file.string());
      argv.push_back(mask);
    }
  };
  std::visit(Visitor{argv, hash_file, rule_file}, task.generator);
  return argv;
}

std::optional<EngineEvent> parse_external_line(std::string_view line, HashAlgorithm algorithm) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' ')) {
    line.remove_suffix(1);
  }
  if (line.empty()) return std::nullopt;

  if (line.front() == '{') {
    auto status = json::parse(line, nullptr, false);
    if (status.is_discarded() || !status.is_object()) parse_failure(line);
    ProgressEvent progress;
    auto p = status.find("progress");
    if (p == status.end() || !p->is_array() || p->empty() || !(*p)[0].is_number_unsigned()) {
      parse_failure(line);
    }
    progress.tried = (*p)[0].get<std::uint64_t>();
    if (auto d = status.find("devices"); d != status.end() && d->is_array()) {
      for (const auto& dev : *d) {
        if (auto s = dev.find("speed"); s != dev.end() && s->is_number()) {
          progress.speed_hps += s->get<double>();
        }
      }
    }
    return progress;
  }

  auto colon = line.find(':');
  if (colon == std::string_view::npos) parse_failure(line);
  auto hash = HexDigest::parse(line.substr(0, colon), algorithm);
  auto plain = hex_decode(line.substr(colon + 1));
  if (!hash || !plain) parse_failure(line);
  return CrackedEvent{*hash, *plain};
}

AttackOutcome run_external_attack(const EngineTask& task, const ExternalEngineConfig& config,
                                  const EventSink& emit, const RunOptions& options) {
  if (config.binary_path.empty() || ::access(config.binary_path.c_str(), X_OK) != 0) {
    throw Error(ErrorCode::kBinaryMissing,
                "external cracker not found: '" + config.binary_path + "'", "engine_path");
  }

  const auto dir = scratch_dir(config);
  const auto stem = unique_stem();
  ScratchFiles scratch{dir / (stem + ".hashes"), dir / (stem + ".rule")};
  {
    std::ofstream out(scratch.hashes, std::ios::binary);
    for (const auto& t : task.targets) out << t.str() << '\n';
    if (const auto* rules = std::get_if<RulesGenerator>(&task.generator)) {
      std::ofstream rule_out(scratch.rules, std::ios::binary);
      for (const auto& r : rules->rules) rule_out << r << '\n';
    }
    if (!out) throw Error(ErrorCode::kSpawnFailure, "cannot write hash file", "work_dir");
  }

  auto args = build_external_command(task, config, scratch.hashes, scratch.rules);
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  int pipe_fds[2];
  if (::pipe(pipe_fds) != 0) throw Error(ErrorCode::kSpawnFailure, "pipe() failed", "engine_path");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
  pid_t pid = 0;
  int rc = ::posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(pipe_fds[1]);
  if (rc != 0) {
    ::close(pipe_fds[0]);
    throw Error(ErrorCode::kSpawnFailure, "cannot start external cracker", "engine_path");
  }

  std::set<HexDigest> remaining(task.targets.begin(), task.targets.end());
  Digester verifier(task.algorithm);
  std::string pending;
  ProgressEvent last_progress;
  bool cancelled = false;
  auto reap = [&](int sig) {
    if (sig != 0) ::kill(pid, sig);
    int status = 0;
    ::waitpid(pid, &status, 0);
    return status;
  };

  try {
    char buf[4096];
    for (;;) {
      if (options.stop.stop_requested()) {
        cancelled = true;
        break;
      }
      pollfd pfd{pipe_fds[0], POLLIN, 0};
      int ready = ::poll(&pfd, 1, 100);
      if (ready == 0) continue;
      if (ready < 0) {
        if (errno == EINTR) continue;
        break;
      }
      auto n = ::read(pipe_fds[0], buf, sizeof buf);
      if (n <= 0) break;
      pending.append(buf, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = pending.find('\n')) != std::string::npos) {
        auto line = pending.substr(0, nl);
        pending.erase(0, nl + 1);
        auto event = parse_external_line(line, task.algorithm);
        if (!event) continue;
        if (auto* c = std::get_if<CrackedEvent>(&*event)) {
          if (remaining.count(c->hash) == 0 || verifier.hex(c->plaintext) != c->hash) continue;
          remaining.erase(c->hash);
        } else if (auto* p = std::get_if<ProgressEvent>(&*event)) {
          last_progress = *p;
        }
        emit(*event);
      }
    }
    if (!cancelled && !pending.empty()) {
      if (auto event = parse_external_line(pending, task.algorithm)) {
        auto* c = std::get_if<CrackedEvent>(&*event);
        if (c == nullptr || (remaining.count(c->hash) && verifier.hex(c->plaintext) == c->hash)) {
          if (c) remaining.erase(c->hash);
          emit(*event);
        }
      }
    }
  } catch (...) {
    ::close(pipe_fds[0]);
    reap(SIGTERM);
    throw;
  }
  ::close(pipe_fds[0]);

  if (cancelled) {
    reap(SIGTERM);
    return AttackOutcome::kCancelled;
  }
  int status = reap(0);
  // hashcat: 0 = cracked, 1 = exhausted
  if (!WIFEXITED(status) || (WEXITSTATUS(status) != 0 && WEXITSTATUS(status) != 1)) {
    throw Error(ErrorCode::kSpawnFailure,
                "external cracker exited abnormally (status " + std::to_string(status) + ")",
                "engine_path");
  }
  auto outcome = remaining.empty() ? FinishOutcome::kAllCracked : FinishOutcome::kExhausted;
  emit(last_progress);
  emit(FinishedEvent{outcome});
  return outcome == FinishOutcome::kAllCracked ? AttackOutcome::kAllCracked
                                               : AttackOutcome::kExhausted;
}

}  // namespace crackmesh::engine
