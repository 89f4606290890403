#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace specforge {

/// Caps OpenMP worker count. n <= 0 restores the default (SPECFORGE_THREADS,
/// else all cores).
void set_threads(int n);
int max_threads();

/// Thread count implied by the SPECFORGE_THREADS environment variable, or 0 if unset.
int threads_from_env();

/// Sum with a fixed block decomposition: per-block partial sums (parallel)
/// combined in block order, so the result is identical for any thread count.
double stable_sum(std::span<const double> values);

}  // namespace specforge

namespace specforge {

/// Deterministic sum of term(i) for i in [0, n); same block scheme as stable_sum.
template <class Term>
double stable_reduce(std::size_t n, Term&& term) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace specforge
