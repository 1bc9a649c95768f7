#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace infmax {

inline int& thread_cap() {
  static int cap = 0;  // 0 = hardware concurrency
  return cap;
}

inline void set_thread_cap(int threads) { thread_cap() = threads; }

inline int resolve_threads(int requested) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int cap = thread_cap() > 0 ? thread_cap() : hw;
  int t = requested > 0 ? requested : cap;
  return t < cap ? t : cap;
}

// Runs f(i) for i in [0, n). Work items must be independent; callers keep
// determinism by deriving any randomness from the index, not the worker.
template <typename F>
void parallel_for(size_t n, F&& f, int threads = 0) {
  int t = resolve_threads(threads);
  if (t <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) f(i);
    return;
  }
  if (static_cast<size_t>(t) > n) t = static_cast<int>(n);
  std::atomic<size_t> cursor{0};
  size_t block = n / (static_cast<size_t>(t) * 8);
  if (block == 0) block = 1;
  auto worker = [&]() {
    for (;;) {
      size_t begin = cursor.fetch_add(block);
      if (begin >= n) return;
      size_t end = begin + block < n ? begin + block : n;
      for (size_t i = begin; i < end; ++i) f(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(t) - 1);
  for (int w = 1; w < t; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace infmax
