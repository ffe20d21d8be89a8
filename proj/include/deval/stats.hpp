#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "deval/errors.hpp"

namespace deval {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw StatsError("mean: empty series");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double population_stddev(std::span<const double> xs) {
    const double m = mean(xs);
    double s2 = 0.0;
    for (double x : xs) s2 += (x - m) * (x - m);
    return std::sqrt(s2 / static_cast<double>(xs.size()));
}

// Product-moment correlation coefficient, clamped to [-1, 1] against
// rounding. Undefined for short or constant series.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw StatsError("pearson: length mismatch");
    if (x.size() < 2) throw StatsError("pearson: need at least 2 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw StatsError("pearson: constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Linear-interpolation quantile (the common "type 7" rule) over a sorted
// copy of the input.
inline double quantile(std::vector<double> xs, double p) {
    if (xs.empty()) throw StatsError("quantile: empty series");
    std::sort(xs.begin(), xs.end());
    if (p <= 0.0) return xs.front();
    if (p >= 1.0) return xs.back();
    const double h = p * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

struct QuartileSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

inline QuartileSummary spread_summary(const std::vector<double>& xs) {
    if (xs.empty()) throw StatsError("spread_summary: empty series");
    QuartileSummary s;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.q1 = quantile(xs, 0.25);
    s.median = quantile(xs, 0.5);
    s.q3 = quantile(xs, 0.75);
    s.max = *std::max_element(xs.begin(), xs.end());
    s.n = xs.size();
    return s;
}

} // namespace deval
