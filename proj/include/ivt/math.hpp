#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace ivt::math {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> values) {
    double peak = kNegInf;
    for (double v : values) peak = std::max(peak, v);
    if (peak == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - peak);
    return peak + std::log(acc);
}

inline double log_factorial(long x) { return std::lgamma(static_cast<double>(x) + 1.0); }

inline double log_binomial(long n, long k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// Upper tail of the standard normal.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace ivt::math
