#pragma once

#include <cstddef>
#include <functional>

namespace drn {

// Number of worker threads used by library loops; 0 selects
// std::thread::hardware_concurrency().
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the thread count, and each index is visited exactly
// once, so per-index results are schedule independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace drn
