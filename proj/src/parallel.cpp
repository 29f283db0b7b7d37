#include "logeuc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace logeuc {

namespace {
std::size_t g_override = 0;
thread_local bool g_inside_worker = false;
}

std::size_t thread_count() {
  if (g_override > 0) return g_override;
  if (const char* env = std::getenv("LOGEUC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

void set_thread_count(std::size_t n) { g_override = n; }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  std::size_t workers = thread_count();
  if (workers > n) workers = n;

  // Nested calls run inline; only the outermost loop fans out.
  if (workers <= 1 || g_inside_worker) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<bool> failed{false};

  auto run_chunk = [&](std::size_t lo, std::size_t hi) {
    const bool was_worker = g_inside_worker;
    g_inside_worker = true;
    try {
      for (std::size_t i = lo; i < hi && !failed.load(std::memory_order_relaxed); ++i) body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
    g_inside_worker = was_worker;
  };

  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    if (lo >= end) break;
    const std::size_t hi = std::min(end, lo + chunk);
    threads.emplace_back(run_chunk, lo, hi);
  }
  run_chunk(begin, std::min(end, begin + chunk));
  for (auto& t : threads) t.join();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace logeuc
