#pragma once

#include <functional>

#include "stinla/types.hpp"

namespace stinla {

// Runs fn(0..n-1), each index exactly once, on up to `threads` workers.
// Callers must write only to per-index slots; results are then independent of
// the thread count, which is what the determinism contract relies on.
// The first exception thrown by any fn is rethrown after all workers join.
void parallel_for(Index n, int threads, const std::function<void(Index)>& fn);

}  // namespace stinla
