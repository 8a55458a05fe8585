#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dmpnn {

// Persistent worker pool for index-based task batches. run() blocks until
// all tasks finish and rethrows the first worker exception. With one thread
// (or none) tasks execute inline on the caller.
class ThreadPool {
 public:
  explicit ThreadPool(int threads);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void run(int n_tasks, const std::function<void(int)>& task);
  int thread_count() const { return static_cast<int>(workers_.size()) + 1; }

 private:
  void worker_loop();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* task_ = nullptr;
  std::atomic<int> next_{0};
  int n_tasks_ = 0;
  int active_ = 0;
  uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace dmpnn
