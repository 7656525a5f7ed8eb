#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include "crackmesh/distribution/distribution.hpp"
#include "crackmesh/domain/types.hpp"
#include "crackmesh/engine/generators.hpp"

namespace crackmesh::engine {

struct BruteGenerator {
  distribution::KeyspaceRange range;
};
struct WordlistGenerator {
  std::vector<std::filesystem::path> paths;
};
struct RulesGenerator {
  std::vector<std::filesystem::path> paths;
  std::vector<std::string> rules;
};
struct CombinatorGenerator {
  std::filesystem::path left;
  std::filesystem::path right;
};

using Generator = std::variant<BruteGenerator, WordlistGenerator, RulesGenerator, CombinatorGenerator>;

struct EngineTask {
  HashAlgorithm algorithm = HashAlgorithm::kMd5;
  std::vector<HexDigest> targets;
  Generator generator;
};

enum class FinishOutcome { kAllCracked, kExhausted };

struct CrackedEvent {
  HexDigest hash;
  std::string plaintext;
};
struct ProgressEvent {
  std::uint64_t tried = 0;
  double speed_hps = 0.0;
};
struct FinishedEvent {
  FinishOutcome outcome = FinishOutcome::kExhausted;
};

using EngineEvent = std::variant<CrackedEvent, ProgressEvent, FinishedEvent>;
using EventSink = std::function<void(const EngineEvent&)>;

struct RunOptions {
  /// A Progress event is emitted at least every this many candidates.
  std::uint64_t progress_interval = 100'000;
  std::stop_token stop;
};

/// kCancelled means the stop token fired; no Finished event is emitted then.
enum class AttackOutcome { kAllCracked, kExhausted, kCancelled };

/// Throws Error(kRuleParse) for bad rules and Error(kFileUnreadable) for
/// missing wordlists.
std::unique_ptr<CandidateSource> make_source(const Generator& generator);

/// Exact candidate count a generator will yield, used for progress totals.
BigInt generator_size(const Generator& generator);

/// Streams candidates, digests each one and reports matches against the
/// remaining targets. Returns early once every target is cracked.
AttackOutcome run_attack(const EngineTask& task, const EventSink& emit,
                         const RunOptions& options = {});

}  // namespace crackmesh::engine
