#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "msbench/errors.hpp"
#include "msbench/stats.hpp"

namespace msbench {

/// Model times of one run in capture order, with the ordinals at which a
/// new directory started (first directory excluded).
struct Trace {
    std::string run_label;
    std::vector<double> samples;
    std::vector<std::size_t> directory_boundaries;
};

/// Two-cluster decomposition of a latency trace. When no credible second
/// mode exists, the trace is reported unimodal with both means equal to the
/// trace mean and every sample labeled fast.
struct RegimeAnalysis {
    bool bimodal = false;
    double fast_mean = 0.0;
    double slow_mean = 0.0;
    std::vector<int> labels; // 0 fast, 1 slow, per sample
    double slow_occupancy = 0.0;
    double separation_ratio = 1.0;
};

struct RegimeConfig {
    double ratio_threshold = 1.15; // slow/fast mean ratio needed to call it bimodal
    double min_fraction = 0.02;    // both regimes must hold at least this share
    std::size_t min_samples = 20;  // below this a trace is always unimodal
    int max_iterations = 100;
};

enum class RunClass { normal, low_performance, unimodal };

inline const char* run_class_name(RunClass c) {
    switch (c) {
        case RunClass::normal: return "normal";
        case RunClass::low_performance: return "low_performance";
        case RunClass::unimodal: return "unimodal";
    }
    return "?";
}

/// Two-cluster 1-D Lloyd iteration on raw times. Centers start at the 10th
/// and 90th percentiles and iterate to an assignment fixed point.
inline RegimeAnalysis detect_regimes(const Trace& trace, const RegimeConfig& config = {}) {
    const auto& xs = trace.samples;
    if (xs.empty()) throw ArgumentError("regime detection needs at least one sample");

    RegimeAnalysis result;
    result.labels.assign(xs.size(), 0);

    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const auto unimodal = [&]() {
        result.bimodal = false;
        result.fast_mean = mean;
        result.slow_mean = mean;
        std::fill(result.labels.begin(), result.labels.end(), 0);
        result.slow_occupancy = 0.0;
        result.separation_ratio = 1.0;
        return result;
    };

    if (xs.size() < config.min_samples) return unimodal();

    double c_fast = percentile(xs, 10.0);
    double c_slow = percentile(xs, 90.0);
    if (!(c_slow > c_fast)) return unimodal();

    std::vector<int> labels(xs.size(), 0);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        bool changed = false;
        double sum_fast = 0.0, sum_slow = 0.0;
        std::size_t n_fast = 0, n_slow = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const int label = std::abs(xs[i] - c_fast) <= std::abs(xs[i] - c_slow) ? 0 : 1;
            if (label != labels[i]) {
                labels[i] = label;
                changed = true;
            }
            if (label == 0) {
                sum_fast += xs[i];
                ++n_fast;
            } else {
                sum_slow += xs[i];
                ++n_slow;
            }
        }
        if (n_fast == 0 || n_slow == 0) return unimodal();
        c_fast = sum_fast / static_cast<double>(n_fast);
        c_slow = sum_slow / static_cast<double>(n_slow);
        if (!changed) break;
    }

    if (c_fast > c_slow) {
        std::swap(c_fast, c_slow);
        for (auto& l : labels) l = 1 - l;
    }

    const std::size_t n_slow = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const double slow_occupancy = static_cast<double>(n_slow) / static_cast<double>(xs.size());
    const double ratio = c_fast > 0.0 ? c_slow / c_fast
                                      : (c_slow > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);

    if (ratio < config.ratio_threshold ||
        std::min(slow_occupancy, 1.0 - slow_occupancy) < config.min_fraction) {
        return unimodal();
    }

    result.bimodal = true;
    result.fast_mean = c_fast;
    result.slow_mean = c_slow;
    result.labels = std::move(labels);
    result.slow_occupancy = slow_occupancy;
    result.separation_ratio = ratio;
    return result;
}

/// A bimodal run that spends most of its time in the slow regime is a
/// low-performance run.
inline RunClass classify_run(const RegimeAnalysis& analysis, double occupancy_threshold = 0.5) {
    if (!analysis.bimodal) return RunClass::unimodal;
    return analysis.slow_occupancy > occupancy_threshold ? RunClass::low_performance : RunClass::normal;
}

/// Cross-run percentile comparison. Curve values on the grid are unweighted
/// means of per-run percentiles; headline means pool all samples.
struct HeadlineEntry {
    std::string metric;
    double a = 0.0;
    double b = 0.0;
    char leader = '-'; // 'A', 'B', or '-' on a tie
};

struct ComparisonReport {
    std::string label_a;
    std::string label_b;
    std::vector<double> grid;
    std::vector<double> curve_a;
    std::vector<double> curve_b;
    std::vector<double> crossover_percentiles;
    std::vector<HeadlineEntry> headline; // mean, median, p5, p95
};

inline std::vector<double> default_percentile_grid() {
    std::vector<double> grid(99);
    std::iota(grid.begin(), grid.end(), 1.0);
    return grid;
}

namespace detail {

inline double averaged_percentile(const std::vector<Trace>& runs, double p) {
    double sum = 0.0;
    for (const auto& t : runs) sum += percentile(t.samples, p);
    return sum / static_cast<double>(runs.size());
}

inline double pooled_mean(const std::vector<Trace>& runs) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : runs) {
        sum = std::accumulate(t.samples.begin(), t.samples.end(), sum);
        n += t.samples.size();
    }
    return sum / static_cast<double>(n);
}

inline char faster_of(double a, double b) { return a < b ? 'A' : (b < a ? 'B' : '-'); }

} // namespace detail

inline ComparisonReport compare_runs(const std::vector<Trace>& runs_a, const std::vector<Trace>& runs_b,
                                     std::vector<double> grid = default_percentile_grid(),
                                     std::string label_a = "A", std::string label_b = "B") {
    if (runs_a.empty() || runs_b.empty()) throw ArgumentError("comparison needs at least one run per side");
    for (const auto* side : {&runs_a, &runs_b}) {
        for (const auto& t : *side) {
            if (t.samples.empty()) throw ArgumentError("comparison traces must be non-empty");
        }
    }
    if (grid.empty()) throw ArgumentError("percentile grid must be non-empty");

    ComparisonReport report;
    report.label_a = std::move(label_a);
    report.label_b = std::move(label_b);
    report.grid = std::move(grid);
    report.curve_a.reserve(report.grid.size());
    report.curve_b.reserve(report.grid.size());

    int prev_sign = 0;
    for (double p : report.grid) {
        const double a = detail::averaged_percentile(runs_a, p);
        const double b = detail::averaged_percentile(runs_b, p);
        report.curve_a.push_back(a);
        report.curve_b.push_back(b);
        const double diff = b - a;
        int sign = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
        if (sign == 0) sign = prev_sign; // zeros inherit the previous sign
        if (prev_sign != 0 && sign != 0 && sign != prev_sign) {
            report.crossover_percentiles.push_back(p);
        }
        prev_sign = sign;
    }

    const double mean_a = detail::pooled_mean(runs_a);
    const double mean_b = detail::pooled_mean(runs_b);
    report.headline.push_back({"mean", mean_a, mean_b, detail::faster_of(mean_a, mean_b)});
    for (const auto& [metric, p] : {std::pair<const char*, double>{"median", 50.0}, {"p5", 5.0}, {"p95", 95.0}}) {
        const double a = detail::averaged_percentile(runs_a, p);
        const double b = detail::averaged_percentile(runs_b, p);
        report.headline.push_back({metric, a, b, detail::faster_of(a, b)});
    }
    return report;
}

inline ComparisonReport compare_runs(const Trace& a, const Trace& b,
                                     std::vector<double> grid = default_percentile_grid()) {
    return compare_runs(std::vector<Trace>{a}, std::vector<Trace>{b}, std::move(grid),
                        a.run_label.empty() ? "A" : a.run_label, b.run_label.empty() ? "B" : b.run_label);
}

/// Temporal view of a trace: (ordinal, seconds) pairs, optionally smoothed
/// by a centered moving average with truncated edges.
inline std::vector<std::pair<std::size_t, double>> temporal_series(const Trace& trace,
                                                                   std::size_t smoothing_window = 1) {
    if (trace.samples.empty()) throw ArgumentError("temporal series of an empty trace");
    if (smoothing_window < 1) throw ArgumentError("smoothing window must be >= 1");
    const auto& xs = trace.samples;
    std::vector<std::pair<std::size_t, double>> series;
    series.reserve(xs.size());
    if (smoothing_window == 1) {
        for (std::size_t i = 0; i < xs.size(); ++i) series.emplace_back(i, xs[i]);
        return series;
    }
    const std::size_t left = (smoothing_window - 1) / 2;
    const std::size_t right = smoothing_window / 2;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::size_t lo = i >= left ? i - left : 0;
        const std::size_t hi = std::min(xs.size() - 1, i + right);
        double sum = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) sum += xs[j];
        series.emplace_back(i, sum / static_cast<double>(hi - lo + 1));
    }
    return series;
}

} // namespace msbench
