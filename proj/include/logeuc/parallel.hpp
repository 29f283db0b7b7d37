#pragma once

#include <cstddef>
#include <functional>

namespace logeuc {

/// Number of worker threads: the LOGEUC_THREADS environment variable if set
/// and positive, otherwise set_thread_count()'s value if called, otherwise
/// std::thread::hardware_concurrency().
std::size_t thread_count();

/// Overrides the default thread count (0 restores the automatic choice).
/// The LOGEUC_THREADS environment variable still wins if set.
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [begin, end), split into contiguous chunks across
/// threads. Each index is processed exactly once and results must be written
/// to per-index slots, so the output is identical for every thread count.
/// An exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace logeuc
