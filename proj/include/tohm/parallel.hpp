#ifndef TOHM_PARALLEL_HPP
#define TOHM_PARALLEL_HPP

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tohm {

// 0 (or negative) means "use all hardware threads".
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, n) on up to `threads` workers with a static
// contiguous partition.  Callers must write results into per-index slots;
// reductions happen afterwards in index order, so the outcome never depends
// on the thread count.  The first exception thrown by any worker is
// rethrown on the calling thread.
template <class Body>
void parallel_for(std::int64_t n, int threads, Body&& body) {
  threads = resolve_threads(threads);
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (static_cast<std::int64_t>(threads) > n) threads = static_cast<int>(n);

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    std::int64_t lo = n * t / threads;
    std::int64_t hi = n * (t + 1) / threads;
    workers.emplace_back([&, lo, hi]() {
      try {
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tohm

#endif
