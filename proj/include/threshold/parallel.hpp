#pragma once

#include <cstddef>
#include <functional>

namespace thr {

// Worker count: THRESHOLD_TOOLKIT_THREADS if set, else hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is processed by exactly one
// worker; callers write into pre-sized slots so results are order-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace thr
