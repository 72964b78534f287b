#pragma once

#include <cstddef>
#include <functional>

namespace nlab {

// Runs body(k) for k in [0, n) on up to `threads` workers, each taking a
// contiguous block. Results must be written to per-index slots; callers then
// reduce in index order so output does not depend on the thread count.
// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

// Default worker count: hardware concurrency, at least 1.
int default_threads();

}  // namespace nlab
