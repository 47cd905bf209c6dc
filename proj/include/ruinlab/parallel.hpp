#pragma once

// Deterministic parallel loop: the index range is split into contiguous
// blocks, one per worker.  Work items must derive their randomness from their
// own index (counter-based streams) and write only to per-index slots or
// worker-local integer accumulators, so results are identical for any worker
// count.

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace ruinlab {

template <typename Fn>
void parallel_for(std::int64_t n, int workers, Fn&& fn) {
  if (workers < 1) workers = 1;
  if (n <= 0) return;
  if (workers == 1 || n == 1) {
    fn(std::int64_t{0}, n);
    return;
  }
  if (workers > n) workers = static_cast<int>(n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = n * w / workers;
    const std::int64_t end = n * (w + 1) / workers;
    pool.emplace_back([&fn, &errors, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ruinlab
