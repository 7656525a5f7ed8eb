#include "crackmesh/domain/validation.hpp"

#include <algorithm>

#include "crackmesh/common/error.hpp"
#include "crackmesh/domain/hash_list.hpp"

namespace crackmesh {
namespace {

[[noreturn]] void mode_violation(const std::string& message) {
  throw Error(ErrorCode::kModeConstraintViolated, message, "attack");
}

}  // namespace

void validate_attack_mode(const AttackMode& mode, const ValidationLimits& limits) {
  if (const auto* b = std::get_if<BruteForce>(&mode)) {
    if (b->min_len < 1) mode_violation("brute force min_len must be at least 1");
    if (b->min_len > b->max_len) mode_violation("brute force min_len exceeds max_len");
    if (b->max_len > limits.max_brute_length) {
      mode_violation("brute force max_len exceeds cap of " +
                     std::to_string(limits.max_brute_length));
    }
  } else if (const auto* d = std::get_if<Dictionary>(&mode)) {
    if (d->wordlists.empty()) mode_violation("dictionary attack needs at least one wordlist");
  } else if (const auto* r = std::get_if<RuleBased>(&mode)) {
    if (r->wordlists.empty()) mode_violation("rule attack needs at least one wordlist");
    if (r->rules.empty()) mode_violation("rule attack needs at least one rule");
  } else if (const auto* c = std::get_if<Combinator>(&mode)) {
    if (c->left.empty() || c->right.empty()) {
      mode_violation("combinator attack needs two wordlists");
    }
  }
}

Job validate_job(const JobRequest& request, std::span<const NodeProfile> registry,
                 std::span<const WordlistMeta> wordlists, const ValidationLimits& limits) {
  if (request.hashes.empty()) {
    throw Error(ErrorCode::kEmptyHashes, "no hashes submitted", "hashes");
  }
  for (const auto& h : request.hashes) {
    if (h.size() != digest_hex_length(request.algorithm)) {
      throw Error(ErrorCode::kInvalidHash,
                  "digest length does not match " +
                      std::string(algorithm_name(request.algorithm)),
                  "hashes");
    }
  }
  validate_attack_mode(request.mode, limits);

  if (request.requested_nodes.empty()) {
    throw Error(ErrorCode::kUnknownNode, "no nodes requested", "node_ids");
  }
  for (const auto& id : request.requested_nodes) {
    auto it = std::find_if(registry.begin(), registry.end(),
                           [&](const NodeProfile& n) { return n.node_id == id; });
    if (it == registry.end() || !it->connected) {
      throw Error(ErrorCode::kUnknownNode, "node '" + id + "' is not connected", "node_ids");
    }
  }
  for (const auto& wl : referenced_wordlists(request.mode)) {
    auto it = std::find_if(wordlists.begin(), wordlists.end(),
                           [&](const WordlistMeta& m) { return m.id == wl; });
    if (it == wordlists.end()) {
      throw Error(ErrorCode::kUnknownWordlist, "wordlist '" + wl + "' is not registered",
                  "wordlists");
    }
  }

  Job job;
  job.owner = request.owner;
  job.algorithm = request.algorithm;
  job.mode = request.mode;
  job.hashes = dedup_digests(request.hashes);
  std::vector<NodeId> nodes;
  for (const auto& id : request.requested_nodes) {
    if (std::find(nodes.begin(), nodes.end(), id) == nodes.end()) nodes.push_back(id);
  }
  job.requested_nodes = std::move(nodes);
  job.status = JobStatus::kCreated;
  return job;
}

}  // namespace crackmesh
