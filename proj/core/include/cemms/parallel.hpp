#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "cemms/mesh.hpp"

namespace cemms {

/// Worker count used when a caller passes 0.
inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Run body(k) for k in [0, n) on up to `threads` workers. The first
/// exception thrown by any worker is rethrown after all workers stop.
template <class Body>
void parallel_for(Index n, int threads, Body&& body) {
  if (n <= 0) return;
  if (threads <= 0) threads = hardware_threads();
  const int workers = static_cast<int>(std::min<Index>(threads, n));
  if (workers == 1) {
    for (Index k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      if (failed.load()) return;
      const Index k = next.fetch_add(1);
      if (k >= n) return;
      try {
        body(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cemms
