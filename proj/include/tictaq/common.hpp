#ifndef TICTAQ_COMMON_HPP
#define TICTAQ_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tictaq {

// Physical constants (SI).
inline constexpr double kPlanck = 6.62607e-34;       // J*s
inline constexpr double kDebye = 3.33564e-30;        // C*m per debye
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Evenly spaced grid of n points on [lo, hi], endpoints included.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

// Quantile of a sample by linear interpolation between order statistics:
// h = (n-1)*p, Q = x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
inline double quantile(std::vector<double> sorted_copy, double p) {
    if (sorted_copy.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(sorted_copy.begin(), sorted_copy.end());
    const double h = static_cast<double>(sorted_copy.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted_copy.size()) return sorted_copy.back();
    const double frac = h - static_cast<double>(lo);
    return sorted_copy[lo] + frac * (sorted_copy[lo + 1] - sorted_copy[lo]);
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace tictaq

#endif
