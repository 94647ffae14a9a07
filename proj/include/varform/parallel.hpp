#ifndef VARFORM_PARALLEL_HPP_
#define VARFORM_PARALLEL_HPP_

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace varform {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, count). Each index is processed exactly once; results
// must be written to per-index slots so the outcome is independent of the
// thread count and of scheduling order. The first exception thrown by any
// worker is rethrown on the calling thread.
inline void parallel_for(std::int64_t count,
                         const std::function<void(std::int64_t)>& fn,
                         int threads = 0) {
  const int nthreads = resolve_threads(threads);
  if (count <= 0) return;
  if (nthreads <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads) - 1);
  for (int k = 1; k < nthreads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace varform

#endif  // VARFORM_PARALLEL_HPP_
