#pragma once

#include <cstddef>
#include <functional>

namespace circlecs {

/// Worker count used by grid and branch loops. 0 means hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Calls body(i) for i in [0, count) across the configured workers. Each index
/// is visited exactly once; callers write results into per-index slots, so the
/// output never depends on scheduling. The first exception thrown by any body
/// is rethrown after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace circlecs
