#include "gocor/reduce.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gocor {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

constexpr std::ptrdiff_t kBlock = 4096;

template <typename Term>
double blocked_sum(std::ptrdiff_t n, Exec exec, Term term) {
  const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && blocks > 1)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::ptrdiff_t end = std::min(n, (b + 1) * kBlock);
    double acc = 0.0;
    for (std::ptrdiff_t i = b * kBlock; i < end; ++i) acc += term(i);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

double sum(std::span<const double> x, Exec exec) {
  return blocked_sum(static_cast<std::ptrdiff_t>(x.size()), exec, [&](std::ptrdiff_t i) { return x[i]; });
}

double squared_norm(std::span<const double> x, Exec exec) {
  return blocked_sum(static_cast<std::ptrdiff_t>(x.size()), exec,
                     [&](std::ptrdiff_t i) { return x[i] * x[i]; });
}

double dot(std::span<const double> x, std::span<const double> y, Exec exec) {
  if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
  return blocked_sum(static_cast<std::ptrdiff_t>(x.size()), exec,
                     [&](std::ptrdiff_t i) { return x[i] * y[i]; });
}

}  // namespace gocor
