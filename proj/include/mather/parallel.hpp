#pragma once

#include <cstddef>
#include <functional>

namespace mather {

/// Number of worker threads: MATHER_HULL_THREADS if set to a positive
/// integer, otherwise the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Iterations
/// must write only to their own output slots; exceptions are rethrown on the
/// calling thread (the one from the lowest index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mather
