#pragma once

#include <set>
#include <span>
#include <vector>

#include "crackmesh/distribution/distribution.hpp"
#include "crackmesh/domain/types.hpp"

namespace crackmesh::coordinator {

struct JobPlan {
  JobId job_id = 0;
  std::vector<TaskAssignment> assignments;
};

/// Powers for `job.algorithm` over the requested nodes that are connected
/// and not excluded. Throws Error(kNoEligibleNodes) when that set is empty
/// and Error(kPowerUnknown) when one of them has no positive power.
distribution::PowerMap eligible_powers(const Job& job, std::span<const NodeProfile> nodes,
                                       const std::set<NodeId>& exclude = {});

/// The complete plan. Brute-force jobs get one wave per length, ascending.
/// Task ids are consecutive from `first_task_id`; every task is Pending.
JobPlan plan_job(const Job& job, std::span<const NodeProfile> nodes,
                 std::span<const WordlistMeta> wordlists, TaskId first_task_id);

/// The first wave for brute force, the whole plan otherwise.
std::vector<TaskAssignment> plan_initial(const Job& job, const distribution::PowerMap& powers,
                                         std::span<const WordlistMeta> wordlists,
                                         TaskId first_task_id);

/// One brute-force wave: the keyspace of `length` split over `powers`.
std::vector<TaskAssignment> plan_wave(const Job& job, unsigned length,
                                      const distribution::PowerMap& powers, TaskId first_task_id);

/// Replacement tasks for a Lost task, targeting only `remaining`. Hash
/// slices and keyspace ranges are re-split; wordlist slices move whole to
/// the strongest node.
std::vector<TaskAssignment> replan_lost(const TaskAssignment& lost,
                                        const std::vector<HexDigest>& remaining,
                                        const distribution::PowerMap& powers,
                                        TaskId first_task_id);

}  // namespace crackmesh::coordinator
