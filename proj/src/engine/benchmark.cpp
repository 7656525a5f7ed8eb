#include "crackmesh/engine/benchmark.hpp"

#include <algorithm>
#include <string>

#include "crackmesh/engine/digest.hpp"
#include "crackmesh/engine/generators.hpp"

namespace crackmesh::engine {

double self_benchmark(HashAlgorithm algorithm, const BenchmarkBudget& budget) {
  Digester digester(algorithm);
  distribution::KeyspaceRange range{0, keyspace_size(8), 8};
  BruteSource source(range);
  std::string candidate;
  volatile std::uint8_t sink = 0;

  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + budget.max_time;
  std::uint64_t count = 0;
  while (count < budget.max_candidates && source.next(candidate)) {
    sink = sink ^ digester.raw(candidate)[0];
    ++count;
    if ((count & 1023) == 0 && std::chrono::steady_clock::now() >= deadline) break;
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  elapsed = std::max(elapsed, 1e-9);
  return static_cast<double>(std::max<std::uint64_t>(count, 1)) / elapsed;
}

}  // namespace crackmesh::engine
