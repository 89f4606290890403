#include "specforge/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace specforge {

int threads_from_env() {
  const char* env = std::getenv("SPECFORGE_THREADS");
  if (!env || !*env) return 0;
  try {
    int n = std::stoi(env);
    return n > 0 ? n : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

void set_threads(int n) {
  if (n <= 0) n = threads_from_env();
  if (n <= 0) n = omp_get_num_procs();
  omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

double stable_sum(std::span<const double> values) {
  return stable_reduce(values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace specforge
