#pragma once

#include <cstdint>
#include <functional>

namespace dmlab {

int hardwareThreads();

// Resolve a requested thread count: 0 means "auto" (DMLAB_THREADS environment
// variable if set, else all hardware threads).
int resolveThreadCount(int requested);

// Static partition of [0, n) into contiguous chunks, one worker thread per
// chunk. Workers must write only to disjoint, index-addressed slots; all
// reductions happen serially afterwards, which keeps every result invariant
// under the thread count.
void parallelFor(std::int64_t n, int threads,
                 const std::function<void(std::int64_t, std::int64_t)>& chunk);

}  // namespace dmlab
