#pragma once

#include <cstddef>
#include <functional>

namespace nke {

// Worker count: hardware concurrency capped by NKE_THREADS when set.
unsigned worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and grain, so per-index work is scheduling independent.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace nke
