#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace strategem {

// Runs body(i) for i in [0, n). Each index must be self-contained (own rng
// stream, own output slot); under that contract results are identical for
// every thread count. Exceptions are captured and the first one rethrown.
inline void parallel_for(long n, int threads,
                         const std::function<void(long)>& body) {
  if (n <= 0) {
    return;
  }
  long workers = threads;
  if (workers > n) {
    workers = n;
  }
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  pool.reserve(static_cast<size_t>(workers));
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (long i = w; i < n; i += workers) {
          body(i);
        }
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace strategem
