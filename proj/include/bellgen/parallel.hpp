#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bellgen {

// True when the binary was built with OpenMP support.
inline bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(i) for i in [0, n). The OpenMP path is only valid for bodies that
// write results keyed by index and consume per-index sub-seeds (see
// derive_seed); under that contract the parallel and serial paths produce
// bit-identical output, which tests/test_parallel.cpp checks. The serial
// path is the reference implementation.
template <class Fn>
void for_each_index(std::size_t n, bool parallel, Fn&& fn) {
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
#endif
  }
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace bellgen
