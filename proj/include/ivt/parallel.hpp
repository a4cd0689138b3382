#pragma once

#include <functional>

namespace ivt {

/// IVT_WORKERS if set to a positive integer, otherwise the hardware concurrency.
[[nodiscard]] int default_workers();

/// Runs body(0..count-1) on up to `workers` threads. Each index is handled
/// exactly once; callers write results into per-index slots so reductions stay
/// in index order. The first exception thrown by a body is rethrown.
void parallel_for(long count, int workers, const std::function<void(long)>& body);

}  // namespace ivt
