#pragma once

#include <cstddef>
#include <functional>

namespace fracspde {

/// Worker count: FRACSPDE_THREADS if set, else `requested` when > 0, else
/// the hardware concurrency.
int thread_count(int requested = 0);

/// Calls fn(i) for i in [0, n) on `threads` workers.  The first exception
/// thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fracspde
