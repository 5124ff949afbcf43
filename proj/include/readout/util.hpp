#pragma once

#include <cstddef>
#include <functional>

namespace readout {

// Worker count: an explicit positive request wins, then the READOUT_THREADS
// environment variable, then the hardware concurrency. Always >= 1.
int resolve_thread_count(int requested = 0);

// Runs body(i) for i in [0, n) on up to `threads` workers with a static
// contiguous partition. Results must be written to per-index slots; the
// partition is deterministic, so outputs are independent of scheduling.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace readout
