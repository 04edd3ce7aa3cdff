// SPDX-License-Identifier: Apache-2.0
//
// Index-space parallel loop. Work items write only to their own slot, so
// results are independent of scheduling; callers reduce sequentially to
// keep floating-point sums deterministic.
#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mirl {

inline int effective_threads(int requested) {
  const unsigned hw = std::thread::hardware_concurrency();
  const int cap = hw == 0 ? 1 : static_cast<int>(hw);
  if (requested <= 0) return cap;
  return requested < cap ? requested : cap;
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = effective_threads(threads);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int spawned = threads < static_cast<int>(n) ? threads : static_cast<int>(n);
  pool.reserve(static_cast<std::size_t>(spawned) - 1);
  for (int t = 1; t < spawned; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace mirl
