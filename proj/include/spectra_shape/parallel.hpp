#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spectra_shape
{

/// Runs fn(i) for i in [0, count) on up to `threads` workers with static
/// chunking. fn must only write to per-index storage; callers reduce the
/// results afterwards in index order, which keeps the output independent of
/// the worker count.
template <typename Fn>
void parallel_for(int count, int threads, Fn &&fn)
{
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1)
  {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (count + threads - 1) / threads;
  for (int w = 0; w < threads; ++w)
  {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try
      {
        for (int i = begin; i < end; ++i) fn(i);
      }
      catch (...)
      {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace spectra_shape
