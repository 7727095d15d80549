#include "lrbs/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace lrbs {

namespace {

Count poisson_inversion(double mean, const RngKey& key) {
  const double u = keyed_uniform(key);
  double p = std::exp(-mean);
  double cdf = p;
  Count x = 0;
  while (u > cdf && x < 1000) {
    ++x;
    p *= mean / static_cast<double>(x);
    cdf += p;
  }
  return x;
}

// Hormann (1993), transformed rejection with squeeze.
Count poisson_ptrs(double mean, RngKey key) {
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  while (true) {
    const double u = keyed_uniform(key) - 0.5;
    ++key.k;
    const double v = keyed_uniform(key);
    ++key.k;
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<Count>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * log_mean - std::lgamma(k + 1.0))
      return static_cast<Count>(k);
  }
}

}  // namespace

Count poisson_draw(double mean, RngKey key) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) return poisson_inversion(mean, key);
  return poisson_ptrs(mean, key);
}

}  // namespace lrbs
