#pragma once

#include <cstddef>
#include <functional>

namespace gt {

// Worker cap: min(hardware_concurrency, GTENSOR_THREADS) with GTENSOR_THREADS=1
// forcing serial execution. Resolved once per process.
int worker_count();

// Runs fn(i) for i in [0, n). Work is chunked over workers; callers write
// results into preallocated slots so output is independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace gt
