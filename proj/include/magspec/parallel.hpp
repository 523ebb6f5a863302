#pragma once

// Minimal fork-join helper for embarrassingly parallel per-cube work.
// Results must be written to preassigned slots so reports never depend on
// scheduling order.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace magspec {

inline int default_thread_count() {
  if (const char* env = std::getenv("MAGSPEC_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                         int threads = 0) {
  if (threads <= 0) threads = default_thread_count();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<std::size_t>(threads, count) - 1;
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace magspec
