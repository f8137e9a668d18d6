#include "pumpd/parallel.hpp"

#include <algorithm>
#include <memory>

namespace pumpd {

ThreadPool::ThreadPool(unsigned threads) : n_threads_(std::max(1u, threads)) {
  workers_.reserve(n_threads_ - 1);
  for (unsigned i = 0; i + 1 < n_threads_; ++i)
    workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stop_ = true;
    ++epoch_;
  }
  start_cv_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::run_blocks() {
  for (;;) {
    std::size_t begin = next_.fetch_add(grain_, std::memory_order_relaxed);
    if (begin >= n_) break;
    (*body_)(begin, std::min(begin + grain_, n_));
  }
}

void ThreadPool::worker_loop() {
  unsigned long long seen = 0;
  for (;;) {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      start_cv_.wait(lock, [&] { return epoch_ != seen || stop_; });
      if (stop_) return;
      seen = epoch_;
    }
    run_blocks();
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (++arrived_ == n_threads_ - 1) done_cv_.notify_all();
    }
  }
}

void ThreadPool::parallel_for(std::size_t n,
                              const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  if (n_threads_ == 1 || n < 2 * n_threads_) {
    body(0, n);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    body_ = &body;
    n_ = n;
    grain_ = std::max<std::size_t>(64, n / (8 * n_threads_));
    next_.store(0, std::memory_order_relaxed);
    arrived_ = 0;
    ++epoch_;
  }
  start_cv_.notify_all();
  run_blocks();
  std::unique_lock<std::mutex> lock(mutex_);
  done_cv_.wait(lock, [&] { return arrived_ == n_threads_ - 1; });
  body_ = nullptr;
}

namespace {
std::unique_ptr<ThreadPool>& global_pool() {
  static std::unique_ptr<ThreadPool> pool = std::make_unique<ThreadPool>(1);
  return pool;
}
}  // namespace

ThreadPool& ThreadPool::global() { return *global_pool(); }

void ThreadPool::set_global_threads(unsigned threads) {
  global_pool() = std::make_unique<ThreadPool>(std::max(1u, threads));
}

}  // namespace pumpd
