#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"

namespace gou {

inline double mean(std::span<const double> x) {
    detail::require(!x.empty(), "mean of an empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Sample standard deviation with divisor n - 1.
inline double sample_sd(std::span<const double> x) {
    detail::require(x.size() >= 2, "standard deviation needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

/// Quantile of a sorted sample by linear interpolation between order
/// statistics at position p (n - 1) (0-based).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    detail::require(!sorted.empty(), "quantile of an empty sample");
    detail::require(p >= 0 && p <= 1, "quantile level must lie in [0, 1]");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= sorted.size()) return sorted.back();
    const double w = pos - static_cast<double>(i);
    return sorted[i] + w * (sorted[i + 1] - sorted[i]);
}

inline double quantile(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    return quantile_sorted(x, p);
}

} // namespace gou
