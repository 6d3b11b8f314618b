#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace glnem {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double gamma_draw(Rng& rng, double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(rng);
}

inline double beta_draw(Rng& rng, double a, double b) {
  // Small shapes underflow the gamma ratio; work on the log scale there.
  if (a < 1.0 || b < 1.0) {
    const double log_x = std::log(gamma_draw(rng, a + 1.0, 1.0)) + std::log(uniform01(rng)) / a;
    const double log_y = std::log(gamma_draw(rng, b + 1.0, 1.0)) + std::log(uniform01(rng)) / b;
    const double m = std::max(log_x, log_y);
    return std::exp(log_x - m) / (std::exp(log_x - m) + std::exp(log_y - m));
  }
  const double x = gamma_draw(rng, a, 1.0);
  const double y = gamma_draw(rng, b, 1.0);
  return x / (x + y);
}

}  // namespace glnem
