#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crackmesh/engine/attack.hpp"

namespace crackmesh::engine {

/// Settings for driving an external hashcat-compatible cracker.
struct ExternalEngineConfig {
  std::string binary_path;
  std::vector<std::string> extra_args;
  /// Scratch directory for the hash and rule files; defaults to the system
  /// temp directory.
  std::filesystem::path work_dir;
};

/// hashcat `-m` value: 0 / 100 / 1400.
int external_hash_mode(HashAlgorithm algorithm) noexcept;

/// Full argv (argv[0] = binary) for one task. Attack-mode mapping:
///   wordlist   -a 0 <files...>
///   rules      -a 0 -r <rule_file> <files...>
///   combinator -a 1 <left> <right>
///   brute      -a 3 ?a...?a  (--skip/--limit when the range is partial)
/// Cracks are read back from stdout as `hash:hex(plain)` and status from
/// `--status-json` lines.
std::vector<std::string> build_external_command(const EngineTask& task,
                                                const ExternalEngineConfig& config,
                                                const std::filesystem::path& hash_file,
                                                const std::filesystem::path& rule_file);

/// One line of cracker stdout. Blank lines yield nullopt; anything that is
/// neither a status object nor a crack line throws Error(kParseFailure).
std::optional<EngineEvent> parse_external_line(std::string_view line, HashAlgorithm algorithm);

/// Same contract as run_attack. Throws Error(kBinaryMissing) when the binary
/// is unset or not executable, Error(kSpawnFailure) when the process cannot
/// start or exits abnormally, Error(kParseFailure) on unreadable output.
AttackOutcome run_external_attack(const EngineTask& task, const ExternalEngineConfig& config,
                                  const EventSink& emit, const RunOptions& options = {});

}  // namespace crackmesh::engine
