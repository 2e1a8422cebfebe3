#pragma once

#include <cstddef>
#include <functional>

namespace lsl {

// Worker cap: LSL_THREADS if set to a positive integer, else the hardware
// concurrency (at least 1).
int thread_limit();

// Runs fn(0..count-1), possibly concurrently. Each index must write only to
// its own output slot, which keeps results independent of scheduling. If any
// call throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace lsl
