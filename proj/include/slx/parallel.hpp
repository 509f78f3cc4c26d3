#ifndef SLX_PARALLEL_HPP
#define SLX_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace slx {

/// Number of worker threads: SLX_THREADS env var, else hardware concurrency
/// (capped at 16).
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on the worker pool; blocks until done.
/// Exceptions propagate (first one wins). Results must be written to
/// pre-sized storage by index so output order is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace slx

#endif  // SLX_PARALLEL_HPP
