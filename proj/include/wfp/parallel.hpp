#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wfp {

/// Work is cut into fixed-size chunks whose boundaries depend only on the
/// item count, so per-chunk partial results (and their in-order reduction)
/// do not depend on how many workers ran.
inline constexpr std::int64_t kChunkSize = 4096;

inline std::int64_t chunk_count(std::int64_t n) { return (n + kChunkSize - 1) / kChunkSize; }

/// Calls fn(chunk_index, begin, end) for every chunk, spread over `workers`
/// threads. Exceptions are rethrown on the calling thread.
template <typename Fn>
void for_each_chunk(std::int64_t n, int workers, Fn&& fn) {
  const std::int64_t chunks = chunk_count(n);
  auto run = [&](std::int64_t c) {
    const std::int64_t begin = c * kChunkSize;
    fn(c, begin, std::min(n, begin + kChunkSize));
  };
  const int threads = static_cast<int>(std::min<std::int64_t>(std::max(workers, 1), chunks));
  if (threads <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) run(c);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::int64_t c = next++; c < chunks; c = next++) run(c);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads - 1));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Calls fn(i) for i in [0, n) over `workers` threads; fn must write only to
/// slot i of its output.
template <typename Fn>
void for_each_index(std::int64_t n, int workers, Fn&& fn) {
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::int64_t i = next++; i < n; i = next++) fn(i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  const int threads = static_cast<int>(std::min<std::int64_t>(std::max(workers, 1), n));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace wfp
