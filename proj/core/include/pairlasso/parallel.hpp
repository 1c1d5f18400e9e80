#pragma once

#include <cstdint>
#include <functional>

namespace pairlasso {

// Resolves the worker count: explicit request > PAIRLASSO_THREADS > hardware.
// Always at least 1.
int thread_budget(int requested = 0);

// Runs fn(begin, end) over a static partition of [0, n) on `threads` workers.
// Chunk boundaries depend only on n and the worker count, and each chunk
// touches a disjoint index range, so results are bitwise reproducible for a
// fixed thread budget; with well-separated outputs they are reproducible for
// any budget. Runs inline when threads <= 1 or n is small.
void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace pairlasso
