#pragma once

// Deterministic grid parallelism: each index writes only its own slot, so
// results are bit-identical regardless of scheduling. LAGFORGE_THREADS caps
// the worker count.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace lagforge {

[[nodiscard]] inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* cap = std::getenv("LAGFORGE_THREADS")) {
    char* end = nullptr;
    const long requested = std::strtol(cap, &end, 10);
    if (end && *end == '\0' && requested >= 1)
      n = std::min<long>(n, requested);
  }
  return n;
}

/// Run fn(i) for every i in [0, count) across workers. fn must only write to
/// per-index storage; the first exception thrown (lowest index wins) is
/// rethrown on the calling thread.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::min(worker_count(), count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lagforge
