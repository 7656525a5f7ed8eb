#include "crackmesh/engine/attack.hpp"

#include <chrono>
#include <cstring>
#include <unordered_map>

#include "crackmesh/common/error.hpp"
#include "crackmesh/domain/wordlist.hpp"
#include "crackmesh/engine/digest.hpp"

namespace crackmesh::engine {
namespace {

struct RawDigestHash {
  std::size_t operator()(const RawDigest& d) const noexcept {
    std::uint64_t v;
    std::memcpy(&v, d.data(), sizeof v);
    return static_cast<std::size_t>(v);
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

std::unique_ptr<CandidateSource> make_source(const Generator& generator) {
  struct Visitor {
    std::unique_ptr<CandidateSource> operator()(const BruteGenerator& g) const {
      return std::make_unique<BruteSource>(g.range);
    }
    std::unique_ptr<CandidateSource> operator()(const WordlistGenerator& g) const {
      return std::make_unique<WordlistSource>(g.paths);
    }
    std::unique_ptr<CandidateSource> operator()(const RulesGenerator& g) const {
      return std::make_unique<RuleSource>(g.paths, parse_rules(g.rules));
    }
    std::unique_ptr<CandidateSource> operator()(const CombinatorGenerator& g) const {
      return std::make_unique<CombinatorSource>(g.left, g.right);
    }
  };
  return std::visit(Visitor{}, generator);
}

BigInt generator_size(const Generator& generator) {
  struct Visitor {
    BigInt lines(const std::vector<std::filesystem::path>& paths) const {
      BigInt total = 0;
      for (const auto& p : paths) total += scan_wordlist(p).line_count;
      return total;
    }
    BigInt operator()(const BruteGenerator& g) const { return g.range.size(); }
    BigInt operator()(const WordlistGenerator& g) const { return lines(g.paths); }
    BigInt operator()(const RulesGenerator& g) const { return lines(g.paths) * g.rules.size(); }
    BigInt operator()(const CombinatorGenerator& g) const {
      return lines({g.left}) * lines({g.right});
    }
  };
  return std::visit(Visitor{}, generator);
}

AttackOutcome run_attack(const EngineTask& task, const EventSink& emit,
                         const RunOptions& options) {
  std::unordered_map<RawDigest, HexDigest, RawDigestHash> remaining;
  for (const auto& t : task.targets) remaining.emplace(to_raw(t), t);

  auto source = make_source(task.generator);
  Digester digester(task.algorithm);
  const std::uint64_t interval = options.progress_interval == 0 ? 1 : options.progress_interval;

  Stopwatch clock;
  std::uint64_t tried = 0;
  std::uint64_t since_progress = 0;
  auto progress = [&] {
    double elapsed = clock.seconds();
    emit(ProgressEvent{tried, elapsed > 0 ? static_cast<double>(tried) / elapsed : 0.0});
    since_progress = 0;
  };

  std::string candidate;
  while (!remaining.empty()) {
    if (options.stop.stop_requested()) return AttackOutcome::kCancelled;
    if (!source->next(candidate)) break;
    ++tried;
    auto it = remaining.find(digester.raw(candidate));
    if (it != remaining.end()) {
      emit(CrackedEvent{it->second, candidate});
      remaining.erase(it);
    }
    if (++since_progress >= interval) progress();
  }
  progress();

  auto outcome = remaining.empty() ? FinishOutcome::kAllCracked : FinishOutcome::kExhausted;
  emit(FinishedEvent{outcome});
  return outcome == FinishOutcome::kAllCracked ? AttackOutcome::kAllCracked
                                               : AttackOutcome::kExhausted;
}

}  // namespace crackmesh::engine
