#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spikeseg {

// Shared worker pool for data-parallel loops. Work is split into chunks
// whose boundaries depend only on the item count, and every chunk writes
// disjoint outputs, so results do not depend on the number of threads.
// SPIKESEG_THREADS caps the pool size (default: hardware concurrency).
class ThreadPool {
 public:
  static ThreadPool& instance();

  explicit ThreadPool(int threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int threads() const { return threads_; }

  // Runs fn(begin, end) over a partition of [0, n). Blocks until all
  // chunks finish. Calls from inside a worker run inline (no nesting).
  void for_chunks(std::size_t n, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& fn);

  // Convenience: fn(i) for each i in [0, n).
  void for_each(std::size_t n, const std::function<void(std::size_t)>& fn,
                std::size_t min_chunk = 1);

  static int env_thread_cap();

 private:
  void worker_loop();
  bool run_pending_chunk();

  struct Job {
    const std::function<void(std::size_t, std::size_t)>* fn = nullptr;
    std::size_t n = 0;
    std::size_t chunk = 0;
    std::size_t n_chunks = 0;
    std::size_t next = 0;
    std::size_t done = 0;
  };

  int threads_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_work_;
  std::condition_variable cv_done_;
  Job job_;
  bool stop_ = false;
  bool active_ = false;
};

}  // namespace spikeseg
