#pragma once

#include <chrono>
#include <cstdint>

#include "crackmesh/domain/types.hpp"

namespace crackmesh::engine {

struct BenchmarkBudget {
  std::uint64_t max_candidates = 1'000'000;
  std::chrono::milliseconds max_time{500};
};

/// Digests length-8 brute-force candidates until either budget runs out and
/// returns the measured rate. Always positive.
double self_benchmark(HashAlgorithm algorithm, const BenchmarkBudget& budget = {});

}  // namespace crackmesh::engine
