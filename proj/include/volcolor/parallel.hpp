#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace volcolor {

// Worker count: VOLCOLOR_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VOLCOLOR_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(std::min<long>(v, 1024));
    } catch (...) {
    }
  }
  return hw;
}

// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
// visited by exactly one chunk, so per-index writes stay deterministic.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 4096) {
  unsigned workers = worker_count();
  if (n == 0) return;
  std::size_t chunks = std::min<std::size_t>(workers, (n + min_chunk - 1) / min_chunk);
  if (chunks <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(chunks - 1);
  std::size_t step = (n + chunks - 1) / chunks;
  for (std::size_t c = 1; c < chunks; ++c) {
    std::size_t b = c * step, e = std::min(n, b + step);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(std::size_t{0}, std::min(n, step));
}

}  // namespace volcolor
