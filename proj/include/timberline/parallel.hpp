#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace timberline {

/// Runs fn(i) for i in [0, n) on up to `workers` threads with static
/// contiguous chunks. Callers write results into slot i, so output never
/// depends on the worker count. The exception from the lowest failing chunk
/// is rethrown.
template <class Fn>
void parallelFor(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t threads = std::min<std::size_t>(workers, n);
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = n * t / threads, end = n * (t + 1) / threads;
    pool.emplace_back([&, t, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace timberline
