#include "crackmesh/coordinator/planner.hpp"

#include <algorithm>
#include <map>

#include "crackmesh/common/error.hpp"

namespace crackmesh::coordinator {

using distribution::PowerMap;

namespace {

TaskAssignment make_task(const Job& job, TaskId& next, const NodeId& node, TaskPayload payload,
                         unsigned wave) {
  TaskAssignment t;
  t.task_id = next++;
  t.job_id = job.id;
  t.node_id = node;
  t.payload = std::move(payload);
  t.wave = wave;
  return t;
}

std::vector<WordlistId> distinct(std::vector<WordlistId> ids) {
  std::vector<WordlistId> out;
  for (auto& id : ids)
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(std::move(id));
  return out;
}

std::vector<TaskAssignment> split_hashes(const Job& job, const std::vector<HexDigest>& hashes,
                                         const PowerMap& powers, TaskId& next, unsigned wave) {
  auto dist = distribution::distribute_hashes(hashes, powers);
  std::vector<TaskAssignment> out;
  for (const auto& node : distribution::nodes_by_power_desc(powers)) {
    auto& slice = dist.per_node[node];
    if (!slice.empty()) out.push_back(make_task(job, next, node, HashSlice{slice}, wave));
  }
  return out;
}

std::vector<TaskAssignment> split_keys(const Job& job, const std::vector<HexDigest>& hashes,
                                       const BigInt& start, const BigInt& end, unsigned length,
                                       const PowerMap& powers, TaskId& next) {
  std::vector<TaskAssignment> out;
  for (auto& [node, range] : distribution::split_range(start, end, length, powers))
    out.push_back(
        make_task(job, next, node, KeyspaceSlice{hashes, range.start, range.end, length}, length));
  return out;
}

}  // namespace

PowerMap eligible_powers(const Job& job, std::span<const NodeProfile> nodes,
                         const std::set<NodeId>& exclude) {
  PowerMap powers;
  for (const auto& id : job.requested_nodes) {
    if (exclude.count(id)) continue;
    auto it = std::find_if(nodes.begin(), nodes.end(),
                           [&](const NodeProfile& n) { return n.node_id == id; });
    if (it == nodes.end() || !it->connected) continue;
    auto p = it->power.find(job.algorithm);
    if (p == it->power.end() || !(p->second > 0.0))
      throw Error(ErrorCode::kPowerUnknown,
                  "node '" + id + "' has no measured power for " +
                      std::string(algorithm_name(job.algorithm)),
                  "node_ids");
    powers[id] = p->second;
  }
  if (powers.empty())
    throw Error(ErrorCode::kNoEligibleNodes, "no requested node is connected", "node_ids");
  return powers;
}

std::vector<TaskAssignment> plan_wave(const Job& job, unsigned length, const PowerMap& powers,
                                      TaskId first_task_id) {
  TaskId next = first_task_id;
  return split_keys(job, job.hashes, 0, keyspace_size(length), length, powers, next);
}

std::vector<TaskAssignment> plan_initial(const Job& job, const PowerMap& powers,
                                         std::span<const WordlistMeta> wordlists,
                                         TaskId first_task_id) {
  distribution::validate_powers(powers);
  TaskId next = first_task_id;
  return std::visit(
      [&](const auto& mode) -> std::vector<TaskAssignment> {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, BruteForce>) {
          return plan_wave(job, mode.min_len, powers, first_task_id);
        } else if constexpr (std::is_same_v<T, Combinator>) {
          auto strongest = distribution::nodes_by_power_desc(powers).front();
          return {make_task(job, next, strongest, WordlistSlice{job.hashes, {mode.left, mode.right}},
                            0)};
        } else {
          auto ids = distinct(mode.wordlists);
          if (ids.size() == 1) return split_hashes(job, job.hashes, powers, next, 0);
          std::vector<WordlistMeta> metas;
          for (const auto& id : ids) {
            auto it = std::find_if(wordlists.begin(), wordlists.end(),
                                   [&](const WordlistMeta& w) { return w.id == id; });
            if (it == wordlists.end())
              throw Error(ErrorCode::kUnknownWordlist, "unknown wordlist '" + id + "'",
                          "wordlists");
            metas.push_back(*it);
          }
          auto dist = distribution::distribute_dictionaries(metas, powers);
          std::vector<TaskAssignment> out;
          for (const auto& node : distribution::nodes_by_power_desc(powers)) {
            auto it = dist.per_node.find(node);
            if (it == dist.per_node.end() || it->second.empty()) continue;
            out.push_back(make_task(job, next, node, WordlistSlice{job.hashes, it->second}, 0));
          }
          return out;
        }
      },
      job.mode);
}

JobPlan plan_job(const Job& job, std::span<const NodeProfile> nodes,
                 std::span<const WordlistMeta> wordlists, TaskId first_task_id) {
  auto powers = eligible_powers(job, nodes);
  JobPlan plan{job.id, plan_initial(job, powers, wordlists, first_task_id)};
  if (const auto* brute = std::get_if<BruteForce>(&job.mode)) {
    for (unsigned len = brute->min_len + 1; len <= brute->max_len; ++len) {
      auto wave = plan_wave(job, len, powers, first_task_id + plan.assignments.size());
      plan.assignments.insert(plan.assignments.end(), wave.begin(), wave.end());
    }
  }
  return plan;
}

std::vector<TaskAssignment> replan_lost(const TaskAssignment& lost,
                                        const std::vector<HexDigest>& remaining,
                                        const PowerMap& powers, TaskId first_task_id) {
  distribution::validate_powers(powers);
  Job shell;
  shell.id = lost.job_id;
  TaskId next = first_task_id;
  std::vector<TaskAssignment> out = std::visit(
      [&](const auto& p) -> std::vector<TaskAssignment> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HashSlice>) {
          return split_hashes(shell, remaining, powers, next, lost.wave);
        } else if constexpr (std::is_same_v<T, KeyspaceSlice>) {
          return split_keys(shell, remaining, p.start, p.end, p.length, powers, next);
        } else {
          auto strongest = distribution::nodes_by_power_desc(powers).front();
          return {make_task(shell, next, strongest, WordlistSlice{remaining, p.wordlists},
                            lost.wave)};
        }
      },
      lost.payload);
  for (auto& t : out) t.replaces = lost.task_id;
  return out;
}

}  // namespace crackmesh::coordinator
