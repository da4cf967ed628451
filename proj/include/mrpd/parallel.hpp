#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mrpd {

/// Sum f(i) for i in [0, n). Partial sums are taken over fixed-size blocks
/// (in parallel) and combined in block order, so the result does not depend
/// on the thread count.
template <typename F>
double deterministic_sum(size_t n, F f) {
  constexpr size_t kBlock = 4096;
  size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
    size_t lo = static_cast<size_t>(b) * kBlock;
    size_t hi = lo + kBlock < n ? lo + kBlock : n;
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<size_t>(b)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace mrpd
