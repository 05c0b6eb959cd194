// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_THREAD_POOL_H
#define OLC_THREAD_POOL_H

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace olc {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
// written to per-index slots; the schedule never affects outputs.
inline void parallelFor(size_t count, int jobs, const std::function<void(size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> threads;
  const int n = std::min<int>(jobs, static_cast<int>(count));
  threads.reserve(n);
  for (int t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

}  // namespace olc

#endif
