#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace geoflow::detail {

/// Runs task(p) for every p in [0, count) on at most `threads` workers.
/// Which worker runs which task is unspecified; callers write results into
/// per-task slots and reduce them in index order afterwards.
template <typename Task>
void for_each_partition(int count, int threads, Task&& task) {
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    for (int p = 0; p < count; ++p) task(p);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int p = next.fetch_add(1); p < count; p = next.fetch_add(1)) {
      try {
        task(p);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

/// Bounds [begin, end) of partition p when `total` items are split into
/// `count` contiguous blocks.
inline std::pair<long, long> partition_bounds(long total, int count, int p) {
  const long base = total / count;
  const long extra = total % count;
  const long begin = p * base + std::min<long>(p, extra);
  return {begin, begin + base + (p < extra ? 1 : 0)};
}

}  // namespace geoflow::detail
