#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pumpd {

// Persistent worker pool for data-parallel loops.
//
// parallel_for partitions [0, n) into blocks claimed via an atomic counter.
// Which thread executes a block is unspecified, but every body writes only
// to its own indices, so results are identical for any worker count.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned size() const { return n_threads_; }

  // body(begin, end) is called on disjoint blocks covering [0, n).
  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

  // Process-wide pool used by the solvers. Defaults to 1 thread.
  static ThreadPool& global();
  // Replaces the global pool. Call before starting solves.
  static void set_global_threads(unsigned threads);

 private:
  void worker_loop();
  void run_blocks();

  unsigned n_threads_;
  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
  std::size_t n_ = 0;
  std::size_t grain_ = 0;
  std::atomic<std::size_t> next_{0};
  unsigned arrived_ = 0;
  unsigned long long epoch_ = 0;
  bool stop_ = false;
};

}  // namespace pumpd
