#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace bwi {

/// Worker count: BWI_THREADS when set to a positive integer, else hardware
/// concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("BWI_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) over contiguous chunks. fn must only write
/// to state owned by index i, so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = thread_count()) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace bwi
