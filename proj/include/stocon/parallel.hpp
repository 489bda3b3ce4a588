#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stocon {

enum class Exec { serial, parallel };

// Sets the OpenMP thread budget; no-op in serial builds. n <= 0 keeps the
// runtime default.
inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Runs fn(i) for i in [0, n). Work items must write only to their own
// output slots; reductions happen after the loop in index order, which is
// what keeps results bit-identical across thread counts and schedules.
// An exception thrown by any item aborts the loop and is rethrown after
// the region joins.
template <typename F>
void parallel_for(Exec exec, std::size_t n, F&& fn) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
    std::exception_ptr err;
    std::mutex guard;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace stocon
