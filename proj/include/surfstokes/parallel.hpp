#pragma once

#include <cstddef>
#include <functional>

namespace surfstokes {

/// Worker count from SURFSTOKES_THREADS (default 1, clamped to the hardware).
int configured_threads();

/// Calls body(i) for i in [0, count) on up to `threads` threads. Each index is
/// visited exactly once; the first exception thrown by any worker is
/// rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace surfstokes
