#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace extrude3d {

/// Runs fn(i) for i in [0, count). With threads <= 1 the loop is sequential.
/// Work is split into contiguous chunks; callers must write results into
/// per-index slots so the outcome is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t worker_count =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> workers;
  workers.reserve(worker_count);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < worker_count; ++w) {
    workers.emplace_back([&, w] {
      const std::size_t begin = count * w / worker_count;
      const std::size_t end = count * (w + 1) / worker_count;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace extrude3d
