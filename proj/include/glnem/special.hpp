#pragma once

#include <cmath>
#include <span>

namespace glnem {

// Reentrant log-gamma; std::lgamma writes the global signgam on glibc.
inline double lgamma_safe(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline double log_sum_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

inline double log_sum_exp(std::span<const double> values) {
  double m = -INFINITY;
  for (double v : values) m = v > m ? v : m;
  if (m == -INFINITY) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

inline double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// log(logistic(x)) and log(1 - logistic(x)) without cancellation.
inline double log_logistic(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
inline double log1m_logistic(double x) { return log_logistic(-x); }

}  // namespace glnem
