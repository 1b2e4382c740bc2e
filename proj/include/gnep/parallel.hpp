#pragma once

#include <cstddef>
#include <functional>

namespace gnep {

/// Worker count: GNEP_NUM_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into slot i, so the merged
/// output is ordered by index regardless of scheduling. The first exception
/// thrown (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace gnep
