#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <variant>
#include <vector>

#include "crackmesh/common/bigint.hpp"
#include "crackmesh/domain/types.hpp"

namespace crackmesh::distribution {

/// node_id -> measured hashes per second.
using PowerMap = std::map<NodeId, double>;

/// Throws Error(kEmptyInput) for an empty map and Error(kInvalidPower) for a
/// non-positive or non-finite entry.
void validate_powers(const PowerMap& powers);

/// Nodes ordered strongest first; equal powers fall back to ascending id.
std::vector<NodeId> nodes_by_power_desc(const PowerMap& powers);

/// Per-node hash counts in strongest-first order. Counts sum to `total`
/// and may contain zeros when there are more nodes than items.
std::vector<std::pair<NodeId, std::size_t>> hash_targets(std::size_t total,
                                                         const PowerMap& powers);

struct HashDistribution {
  /// Every node of the power map appears, possibly with an empty list.
  std::map<NodeId, std::vector<HexDigest>> per_node;
};

HashDistribution distribute_hashes(const std::vector<HexDigest>& hashes,
                                   const PowerMap& powers);

struct DictDistribution {
  /// Surviving nodes only; a value lists wordlists in assignment order.
  std::map<NodeId, std::vector<WordlistId>> per_node;
  std::vector<NodeId> removed_nodes;
};

/// Size metric is `line_count`.
DictDistribution distribute_dictionaries(const std::vector<WordlistMeta>& wordlists,
                                         const PowerMap& powers);

struct KeyspaceRange {
  BigInt start;  // inclusive
  BigInt end;    // exclusive
  unsigned length = 1;

  BigInt size() const { return end - start; }
  friend bool operator==(const KeyspaceRange&, const KeyspaceRange&) = default;
};

/// Tiles [start, end) contiguously, strongest node first. Sizes are
/// floor(share * span) with the remainder handed out one unit at a time in
/// strongest-first order; all arithmetic is exact. Nodes whose share rounds
/// to an empty range are omitted. Result is in tiling order.
std::vector<std::pair<NodeId, KeyspaceRange>> split_range(const BigInt& start, const BigInt& end,
                                                          unsigned length,
                                                          const PowerMap& powers);

/// split_range over [0, 95^length).
std::map<NodeId, KeyspaceRange> split_keyspace(unsigned length, const PowerMap& powers);

struct BruteEstimate {
  unsigned length = 1;
};
struct DictionaryEstimate {
  std::uint64_t lines = 0;
};
struct RulesEstimate {
  std::uint64_t lines = 0;
  std::uint64_t rules = 0;
};
struct CombinatorEstimate {
  std::uint64_t left_lines = 0;
  std::uint64_t right_lines = 0;
};

using AttackSummary =
    std::variant<BruteEstimate, DictionaryEstimate, RulesEstimate, CombinatorEstimate>;

/// Exact candidate count for an attack: 95^x, x, x*z or x1*x2.
BigInt candidate_count(const AttackSummary& attack);

/// candidate_count / hps in seconds. Throws Error(kNonPositiveRate).
double estimate_time(const AttackSummary& attack, double hps);

}  // namespace crackmesh::distribution
