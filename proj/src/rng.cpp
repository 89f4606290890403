#include "specforge/rng.hpp"

#include <cmath>

namespace specforge {

long long sample_poisson(CounterRng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean <= 10.0) {
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    long long x = 0;
    // cdf can stall below u by rounding in the far tail; the cap is far past
    // any mass that matters for mean <= 10.
    while (u > cdf && x < 1000) {
      ++x;
      p *= mean / static_cast<double>(x);
      cdf += p;
    }
    return x;
  }

  // PTRS, W. Hormann, "The transformed rejection method for generating
  // Poisson random variables" (1993).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1.0))
      return static_cast<long long>(k);
  }
}

}  // namespace specforge
