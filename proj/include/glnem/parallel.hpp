#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace glnem {

// Long sampler runs grow the heap while storing draws, and glibc then trims
// the freed per-iteration temporaries back to the kernel on every call.
// Raising the trim threshold removes that page-fault churn. Call once from
// main.
inline void retain_freed_heap() {
#ifdef __GLIBC__
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

// Runs fn(0..count-1) on up to `threads` workers. The first exception (by
// job index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace glnem
