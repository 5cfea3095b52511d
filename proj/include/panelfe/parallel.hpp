#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace panelfe {

/* Worker cap: explicit request > PANELFE_THREADS > hardware count. */
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PANELFE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/* Runs body(i) for i in [0, count) on up to n_threads workers. Tasks pull
 * indices from a shared counter; callers that need deterministic output
 * must write into per-index slots and aggregate afterwards in index order.
 * The first exception thrown by any task is rethrown on the caller. */
inline void parallel_for(int count, int n_threads, const std::function<void(int)>& body) {
  n_threads = resolve_threads(n_threads);
  if (count <= 0) return;
  if (n_threads <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  if (n_threads > count) n_threads = count;

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) workers.emplace_back(work);
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace panelfe
