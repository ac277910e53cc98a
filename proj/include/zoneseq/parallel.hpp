#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace zoneseq {

// Runs fn(i) for i in [0, n) on the OpenMP team. Exceptions cannot cross the
// parallel region, so each slot keeps its own and the lowest-index one is
// rethrown afterwards. Output therefore never depends on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

} // namespace zoneseq
