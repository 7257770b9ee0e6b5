#pragma once

#include <cstddef>
#include <functional>

namespace heatlab {

/// Worker count from HEATLAB_THREADS, else hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n). Work is split into contiguous blocks; callers
/// that reduce must write into per-index slots and combine in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace heatlab
