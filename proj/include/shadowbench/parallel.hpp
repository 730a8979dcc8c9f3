#pragma once

// Deterministic work distribution: a worker pool pulls indices from an
// atomic counter, results land in preallocated slots keyed by index, and a
// single-threaded reduction walks the slots in order. Output is therefore
// independent of the thread count and of OS scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace shadowbench::detail {

/// Run fn(i) for i in [0, n) on `threads` workers. The first exception
/// thrown by any worker is rethrown here after all workers finish.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Merges chunk results strictly in chunk order no matter which worker
/// finishes first: submissions ahead of the cursor wait in a buffer.
template <typename R>
class OrderedReducer {
 public:
  explicit OrderedReducer(std::function<void(R&&)> consume) : consume_(std::move(consume)) {}

  void submit(std::size_t chunk_index, R&& result) {
    std::lock_guard<std::mutex> lock(mutex_);
    pending_.emplace(chunk_index, std::move(result));
    while (!pending_.empty() && pending_.begin()->first == next_) {
      consume_(std::move(pending_.begin()->second));
      pending_.erase(pending_.begin());
      ++next_;
    }
  }

 private:
  std::function<void(R&&)> consume_;
  std::mutex mutex_;
  std::map<std::size_t, R> pending_;
  std::size_t next_ = 0;
};

}  // namespace shadowbench::detail
