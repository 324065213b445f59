#include "spikeseg/thread_pool.hpp"

#include <algorithm>
#include <cstdlib>

namespace spikeseg {

namespace {
thread_local bool t_inside_worker = false;
}

int ThreadPool::env_thread_cap() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("SPIKESEG_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

ThreadPool& ThreadPool::instance() {
  static ThreadPool pool(env_thread_cap());
  return pool;
}

ThreadPool::ThreadPool(int threads) : threads_(std::max(1, threads)) {
  // the calling thread participates, so spawn one fewer worker
  for (int i = 0; i < threads_ - 1; ++i)
    workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_work_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop() {
  t_inside_worker = true;
  for (;;) {
    std::unique_lock<std::mutex> lock(mu_);
    cv_work_.wait(lock, [this] { return stop_ || (active_ && job_.next < job_.n_chunks); });
    if (stop_) return;
    lock.unlock();
    while (run_pending_chunk()) {
    }
  }
}

bool ThreadPool::run_pending_chunk() {
  std::size_t idx;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (!active_ || job_.next >= job_.n_chunks) return false;
    idx = job_.next++;
  }
  const std::size_t begin = idx * job_.chunk;
  const std::size_t end = std::min(begin + job_.chunk, job_.n);
  (*job_.fn)(begin, end);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (++job_.done == job_.n_chunks) cv_done_.notify_all();
  }
  return true;
}

void ThreadPool::for_chunks(std::size_t n, std::size_t min_chunk,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (threads_ == 1 || t_inside_worker || n <= min_chunk) {
    fn(0, n);
    return;
  }
  // chunk size depends only on n and the pool size fixed at startup
  const std::size_t max_chunks = static_cast<std::size_t>(threads_) * 4;
  std::size_t chunk = std::max(min_chunk, (n + max_chunks - 1) / max_chunks);
  std::size_t n_chunks = (n + chunk - 1) / chunk;
  if (n_chunks <= 1) {
    fn(0, n);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    job_ = Job{&fn, n, chunk, n_chunks, 0, 0};
    active_ = true;
  }
  cv_work_.notify_all();
  while (run_pending_chunk()) {
  }
  std::unique_lock<std::mutex> lock(mu_);
  cv_done_.wait(lock, [this] { return job_.done == job_.n_chunks; });
  active_ = false;
}

void ThreadPool::for_each(std::size_t n, const std::function<void(std::size_t)>& fn,
                          std::size_t min_chunk) {
  for_chunks(n, min_chunk, [&fn](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace spikeseg
