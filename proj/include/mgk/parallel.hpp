#pragma once

// Minimal fork-join helper for embarrassingly parallel index ranges.  Workers
// get contiguous chunks plus their worker id, so callers can keep one kernel
// engine (and its memo cache) per worker instead of sharing mutable state.

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mgk {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs chunk(worker, begin, end) over a partition of [0, n); chunk 0 executes
// on the calling thread.  The first exception thrown by any worker is
// rethrown after the join.
inline void parallel_for(
    std::size_t n, int threads,
    const std::function<void(int, std::size_t, std::size_t)>& chunk) {
  int workers = resolve_threads(threads);
  if (n == 0) return;
  if (static_cast<std::size_t>(workers) > n)
    workers = static_cast<int>(n);
  if (workers <= 1) {
    chunk(0, 0, n);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  std::size_t base = n / workers, extra = n % workers;
  auto bounds = [&](int w) {
    std::size_t lo = w * base + std::min<std::size_t>(w, extra);
    std::size_t len = base + (static_cast<std::size_t>(w) < extra ? 1 : 0);
    return std::pair<std::size_t, std::size_t>{lo, lo + len};
  };
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back([&, w] {
      auto [lo, hi] = bounds(w);
      try {
        chunk(w, lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  auto [lo, hi] = bounds(0);
  try {
    chunk(0, lo, hi);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mgk
