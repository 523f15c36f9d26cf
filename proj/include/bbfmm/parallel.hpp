#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace bbfmm {

/// Set the thread count used by every parallel stage; n <= 0 keeps the
/// OpenMP default.
inline void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

inline int max_threads() { return omp_get_max_threads(); }

/// Dynamic-schedule parallel loop over [0, n). The first exception thrown by
/// any iteration is rethrown on the calling thread after the loop.
template <typename Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn) {
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace bbfmm
