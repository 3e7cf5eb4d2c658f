#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace yy {

// Process-wide worker count for row-parallel loops (0 = hardware default).
void set_thread_count(int threads);
int thread_count();

// Runs fn(i) for i in [begin, end). Work is handed out in contiguous chunks;
// every index is processed by exactly the same code regardless of the thread
// count, so results must not depend on the partition.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace yy
