#pragma once

#include <cstddef>
#include <functional>

namespace zsinfer {

// Runs fn(i) for every i in [0, n) using up to `threads` worker threads,
// splitting the index range into contiguous chunks. Callers keep determinism
// by writing results into per-index slots and reducing after the call
// returns; nothing about the execution order may leak into outputs. If any
// invocation throws, the exception from the lowest-indexed failing chunk is
// rethrown after all threads join. threads < 2 runs inline.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace zsinfer
