#pragma once

#include <cstddef>
#include <cmath>
#include <span>

namespace execq {

// Pairwise summation: order-insensitive w.r.t. worker partition (input order
// is fixed by index) and more accurate than naive left-to-right.
inline double pairwise_sum(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double mean(std::span<const double> x) {
    return pairwise_sum(x) / static_cast<double>(x.size());
}

// Two-pass sample variance (unbiased, n-1 denominator).
inline double sample_variance(std::span<const double> x, double m) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double acc = 0.0;
    // compensated accumulation keeps the result independent of magnitudes
    double comp = 0.0;
    for (double v : x) {
        const double d = (v - m) * (v - m);
        const double y = d - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return acc / static_cast<double>(n - 1);
}

inline double sample_stderr(std::span<const double> x, double m) {
    return std::sqrt(sample_variance(x, m) / static_cast<double>(x.size()));
}

}  // namespace execq
