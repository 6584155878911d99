#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace contourline {

inline int default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Each index owns its output slot, so results
/// are deterministic regardless of the thread count.
template <typename Fn>
void parallel_for(int n, Fn&& fn, int threads) {
  if (threads <= 1 || n < 2 * threads) {
    for (int i = 0; i < n; i++) fn(i);
    return;
  }
  threads = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; t++) {
    pool.emplace_back([&, t] {
      const int lo = static_cast<int>(static_cast<long long>(n) * t / threads);
      const int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
      try {
        for (int i = lo; i < hi; i++) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace contourline
