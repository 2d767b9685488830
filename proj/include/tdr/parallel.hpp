#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "tdr/linalg.hpp"

namespace tdr {

/// Calls body(i) for i in [0, count) on up to `workers` threads. Indices are
/// handed out dynamically, so body must only write to slot i of its outputs.
/// body must not throw.
template <typename Body>
void parallel_for(Index count, int workers, Body&& body) {
  const int threads = static_cast<int>(std::min<Index>(std::max(workers, 1), count));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace tdr
