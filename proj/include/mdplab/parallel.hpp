#pragma once

#include <exception>
#include <mutex>

namespace mdplab {

/// Worker count used by the OpenMP kernels. Scheduling only; results never
/// depend on it.
void set_threads(int n);
int threads();

/// Runs f(i) for i in [0, count) on the OpenMP team. Each index writes its
/// own slot, so the outcome does not depend on scheduling. The exception of
/// the lowest failing index is rethrown after the loop.
template <class F>
void parallel_for(long long count, F&& f) {
  std::exception_ptr error;
  long long error_index = count;
  std::mutex guard;
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      f(i);
    } catch (...) {
      std::lock_guard lock(guard);
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace mdplab
