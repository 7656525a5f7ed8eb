#include "crackmesh/distribution/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crackmesh/common/error.hpp"

namespace crackmesh::distribution {
namespace {

double total_of(const PowerMap& powers) {
  double total = 0.0;
  for (const auto& [id, p] : powers) total += p;
  return total;
}

/// Each power as an exact integer on a shared binary exponent, so that
/// ratios between them are preserved without rounding.
std::vector<BigInt> exact_weights(const std::vector<double>& powers) {
  std::vector<std::uint64_t> mantissas;
  std::vector<int> exponents;
  int min_exp = 0;
  bool first = true;
  for (double p : powers) {
    int e = 0;
    double m = std::frexp(p, &e);
    auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
    e -= 53;
    mantissas.push_back(mant);
    exponents.push_back(e);
    if (first || e < min_exp) min_exp = e;
    first = false;
  }
  std::vector<BigInt> out;
  out.reserve(powers.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    BigInt w = mantissas[i];
    w <<= static_cast<unsigned>(exponents[i] - min_exp);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

void validate_powers(const PowerMap& powers) {
  if (powers.empty()) throw Error(ErrorCode::kEmptyInput, "no nodes to distribute over", "powers");
  for (const auto& [id, p] : powers) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidPower, "node '" + id + "' has non-positive power", "powers");
    }
  }
}

std::vector<NodeId> nodes_by_power_desc(const PowerMap& powers) {
  std::vector<NodeId> ids;
  ids.reserve(powers.size());
  for (const auto& [id, p] : powers) ids.push_back(id);
  // map iteration is already ascending by id, so a stable sort keeps the tiebreak
  std::stable_sort(ids.begin(), ids.end(), [&](const NodeId& a, const NodeId& b) {
    return powers.at(a) > powers.at(b);
  });
  return ids;
}

std::vector<std::pair<NodeId, std::size_t>> hash_targets(std::size_t total,
                                                         const PowerMap& powers) {
  validate_powers(powers);
  const double total_power = total_of(powers);
  const auto sorted = nodes_by_power_desc(powers);

  std::vector<std::pair<NodeId, std::size_t>> targets;
  targets.reserve(sorted.size());
  std::size_t allocated = 0;
  for (const auto& id : sorted) {
    double share = std::floor(powers.at(id) / total_power * static_cast<double>(total));
    auto count = std::max<std::size_t>(1, static_cast<std::size_t>(share));
    targets.emplace_back(id, count);
    allocated += count;
  }

  if (allocated < total) {
    std::size_t remaining = total - allocated;
    for (std::size_t i = 0; i < remaining; ++i) ++targets[i % targets.size()].second;
  } else {
    // max(1, .) can over-allocate when nodes outnumber items; take the
    // excess back from the weakest nodes first.
    std::size_t excess = allocated - total;
    while (excess > 0) {
      for (auto it = targets.rbegin(); it != targets.rend() && excess > 0; ++it) {
        if (it->second > 0) {
          --it->second;
          --excess;
        }
      }
    }
  }
  return targets;
}

HashDistribution distribute_hashes(const std::vector<HexDigest>& hashes,
                                   const PowerMap& powers) {
  if (hashes.empty()) throw Error(ErrorCode::kEmptyInput, "no hashes to distribute", "hashes");
  HashDistribution out;
  std::size_t index = 0;
  for (const auto& [id, count] : hash_targets(hashes.size(), powers)) {
    auto first = hashes.begin() + static_cast<std::ptrdiff_t>(index);
    out.per_node[id] = std::vector<HexDigest>(first, first + static_cast<std::ptrdiff_t>(count));
    index += count;
  }
  return out;
}

DictDistribution distribute_dictionaries(const std::vector<WordlistMeta>& wordlists,
                                         const PowerMap& powers) {
  if (wordlists.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no wordlists to distribute", "wordlists");
  }
  validate_powers(powers);

  DictDistribution out;
  auto sorted_nodes = nodes_by_power_desc(powers);
  if (wordlists.size() < sorted_nodes.size()) {
    auto keep = static_cast<std::ptrdiff_t>(wordlists.size());
    out.removed_nodes.assign(sorted_nodes.begin() + keep, sorted_nodes.end());
    sorted_nodes.erase(sorted_nodes.begin() + keep, sorted_nodes.end());
  }

  double total_power = 0.0;
  PowerMap survivors;
  for (const auto& id : sorted_nodes) survivors[id] = powers.at(id);
  total_power = total_of(survivors);

  double total_size = 0.0;
  for (const auto& w : wordlists) total_size += static_cast<double>(w.line_count);

  std::map<NodeId, double> target;
  std::map<NodeId, double> load;
  for (const auto& id : sorted_nodes) {
    target[id] = survivors.at(id) / total_power * total_size;
    load[id] = 0.0;
    out.per_node[id];
  }

  std::vector<std::size_t> by_size(wordlists.size());
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
    if (wordlists[a].line_count != wordlists[b].line_count) {
      return wordlists[a].line_count < wordlists[b].line_count;
    }
    return wordlists[a].id < wordlists[b].id;
  });

  std::vector<bool> assigned(wordlists.size(), false);
  auto assign = [&](std::size_t idx, const NodeId& node) {
    out.per_node[node].push_back(wordlists[idx].id);
    load[node] += static_cast<double>(wordlists[idx].line_count);
    assigned[idx] = true;
  };

  assign(by_size.front(), sorted_nodes.back());

  // heaviest first among the rest
  std::vector<std::size_t> rest(by_size.begin() + 1, by_size.end());
  std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
    if (wordlists[a].line_count != wordlists[b].line_count) {
      return wordlists[a].line_count > wordlists[b].line_count;
    }
    return wordlists[a].id < wordlists[b].id;
  });
  for (auto idx : rest) {
    const auto size = static_cast<double>(wordlists[idx].line_count);
    for (const auto& node : sorted_nodes) {
      if (load[node] + size <= target[node]) {
        assign(idx, node);
        break;
      }
    }
  }

  for (std::size_t idx = 0; idx < wordlists.size(); ++idx) {
    if (assigned[idx]) continue;
    const NodeId* best = nullptr;
    double best_room = 0.0;
    for (const auto& node : sorted_nodes) {
      double room = target[node] - load[node];
      if (best == nullptr || room > best_room) {
        best = &node;
        best_room = room;
      }
    }
    assign(idx, *best);
  }
  return out;
}

std::vector<std::pair<NodeId, KeyspaceRange>> split_range(const BigInt& start, const BigInt& end,
                                                          unsigned length,
                                                          const PowerMap& powers) {
  validate_powers(powers);
  if (start < 0 || end <= start || end > keyspace_size(length)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid keyspace range", "keyspace");
  }
  const auto sorted = nodes_by_power_desc(powers);
  std::vector<double> ordered_powers;
  for (const auto& id : sorted) ordered_powers.push_back(powers.at(id));
  const auto weights = exact_weights(ordered_powers);
  BigInt weight_total = 0;
  for (const auto& w : weights) weight_total += w;

  const BigInt span = end - start;
  std::vector<BigInt> sizes;
  BigInt assigned = 0;
  for (const auto& w : weights) {
    BigInt s = w * span / weight_total;
    assigned += s;
    sizes.push_back(std::move(s));
  }
  BigInt remainder = span - assigned;
  for (std::size_t i = 0; remainder > 0; i = (i + 1) % sizes.size()) {
    sizes[i] += 1;
    remainder -= 1;
  }

  std::vector<std::pair<NodeId, KeyspaceRange>> out;
  BigInt cursor = start;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sizes[i] == 0) continue;
    KeyspaceRange r{cursor, cursor + sizes[i], length};
    cursor = r.end;
    out.emplace_back(sorted[i], std::move(r));
  }
  return out;
}

std::map<NodeId, KeyspaceRange> split_keyspace(unsigned length, const PowerMap& powers) {
  if (length < 1) throw Error(ErrorCode::kInvalidArgument, "length must be at least 1", "length");
  std::map<NodeId, KeyspaceRange> out;
  for (auto& [id, range] : split_range(0, keyspace_size(length), length, powers)) {
    out.emplace(id, std::move(range));
  }
  return out;
}

BigInt candidate_count(const AttackSummary& attack) {
  struct Visitor {
    BigInt operator()(const BruteEstimate& b) const {
      if (b.length < 1) {
        throw Error(ErrorCode::kInvalidArgument, "length must be at least 1", "length");
      }
      return keyspace_size(b.length);
    }
    BigInt operator()(const DictionaryEstimate& d) const { return BigInt(d.lines); }
    BigInt operator()(const RulesEstimate& r) const { return BigInt(r.lines) * r.rules; }
    BigInt operator()(const CombinatorEstimate& c) const {
      return BigInt(c.left_lines) * c.right_lines;
    }
  };
  return std::visit(Visitor{}, attack);
}

double estimate_time(const AttackSummary& attack, double hps) {
  if (!(hps > 0.0) || !std::isfinite(hps)) {
    throw Error(ErrorCode::kNonPositiveRate, "hash rate must be positive", "hps");
  }
  return candidate_count(attack).convert_to<double>() / hps;
}

}  // namespace crackmesh::distribution
