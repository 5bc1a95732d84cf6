#pragma once

#include <cstddef>
#include <functional>

namespace splitplot {

/// Worker count: `requested` (0 = hardware concurrency), capped by the
/// SPLITPLOT_THREADS environment variable when set, and at least 1.
std::size_t worker_count(std::size_t requested = 0);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace splitplot
