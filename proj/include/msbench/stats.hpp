#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "msbench/errors.hpp"

namespace msbench {

/// Percentile with linear interpolation at rank h = (n-1) * p / 100 over
/// the ascending sort. p in [0, 100]; p=0 is the minimum, p=100 the maximum.
inline double percentile(std::span<const double> samples, double p) {
    if (samples.empty()) throw ArgumentError("percentile of empty sample set");
    if (!(p >= 0.0 && p <= 100.0)) throw ArgumentError("percentile rank must be in [0, 100]");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * p / 100.0;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
    if (lo == hi) return sorted[lo];
    const double t = h - static_cast<double>(lo);
    return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

inline double percentile(const std::vector<double>& samples, double p) {
    return percentile(std::span<const double>(samples), p);
}

/// Descriptive statistics of a latency trace. Standard deviation is the
/// population form (the trace is the complete set of a run's measurements).
struct StatSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0;
};

inline StatSummary summarize(std::span<const double> samples) {
    if (samples.empty()) throw ArgumentError("summary of empty sample set");
    StatSummary s;
    s.n = samples.size();
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(s.n);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = percentile(sorted, 50.0);
    s.p5 = percentile(sorted, 5.0);
    s.p95 = percentile(sorted, 95.0);
    double sq = 0.0;
    for (double v : samples) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(s.n));
    return s;
}

inline StatSummary summarize(const std::vector<double>& samples) {
    return summarize(std::span<const double>(samples));
}

} // namespace msbench
