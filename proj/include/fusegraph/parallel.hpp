#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fusegraph::detail {

/// Runs body(i) for i in [0, count) on a small static thread pool. Every index is
/// processed by exactly one thread, so per-index results do not depend on scheduling.
template <typename Body>
void parallel_for(std::ptrdiff_t count, Body&& body, std::ptrdiff_t min_per_thread = 64) {
  const auto hw = static_cast<std::ptrdiff_t>(std::max(1u, std::thread::hardware_concurrency()));
  const auto threads = std::min(hw, std::max<std::ptrdiff_t>(1, count / min_per_thread));
  if (threads <= 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (std::ptrdiff_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::ptrdiff_t i = t; i < count; i += threads) body(i);
    });
  }
}

}  // namespace fusegraph::detail
