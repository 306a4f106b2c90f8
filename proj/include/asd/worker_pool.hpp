#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace asd {

/// Bounded pool of worker threads. parallel_for blocks until every index is
/// done; the calling thread also takes work, so nested calls cannot
/// deadlock. Results must be written positionally by the callback.
class WorkerPool {
 public:
  /// `threads` counts the caller: threads == 1 runs everything inline.
  explicit WorkerPool(std::size_t threads);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return workers_.size() + 1; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

 private:
  void worker_loop();

  std::vector<std::thread> workers_;
  std::deque<std::function<void()>> queue_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

/// Runs fn(0..n-1) on the pool, or inline when pool is null.
void parallel_for(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn);

/// Thread count from --threads, else $ASD_THREADS, else hardware concurrency.
std::size_t resolve_thread_count(std::size_t requested);

}  // namespace asd
