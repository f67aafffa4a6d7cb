#pragma once

#include <cstddef>
#include <functional>

namespace bowen {

// Fixed chunk length used by parallel_for.
inline constexpr std::size_t kParallelChunk = 1024;

// Worker count used by library loops. 0 means one per hardware thread.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(begin, end) over disjoint contiguous chunks of [0, n). Chunk
// boundaries depend on n only, never on the thread count, so callers that
// write results by index get identical output for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace bowen
