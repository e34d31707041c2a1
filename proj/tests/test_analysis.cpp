#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "msbench/analysis.hpp"
#include "msbench/synthetic_backend.hpp"

using namespace msbench;

namespace {

struct LabeledTrace {
    Trace trace;
    std::vector<int> truth;
};

/// Draws a trace from the two-regime simulator without sleeping; the
/// simulator's own state sequence is the ground truth.
LabeledTrace simulate(const LatencyModel& model, std::size_t n) {
    SyntheticBackend backend(model);
    LabeledTrace out;
    out.trace.run_label = "sim";
    for (std::size_t i = 0; i < n; ++i) out.trace.samples.push_back(backend.sample_duration());
    out.truth = backend.state_trace();
    return out;
}

double label_accuracy(const std::vector<int>& labels, const std::vector<int>& truth) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

} // namespace

TEST_CASE("constant trace is unimodal") {
    Trace t;
    t.samples.assign(1000, 0.008);
    const auto r = detect_regimes(t);
    CHECK_FALSE(r.bimodal);
    CHECK(r.fast_mean == Catch::Approx(0.008).epsilon(1e-12));
    CHECK(r.slow_mean == r.fast_mean);
    CHECK(r.slow_occupancy == 0.0);
    CHECK(std::count(r.labels.begin(), r.labels.end(), 0) == 1000);
}

TEST_CASE("two-regime mixture is recovered") {
    LatencyModel model;
    model.fast_mean = 0.007;
    model.slow_mean = 0.009;
    model.jitter_sd = 0.0002;
    model.fast_dwell_mean = 7; // ~70% fast occupancy
    model.slow_dwell_mean = 3;
    model.seed = 12;
    const auto sim = simulate(model, 10000);

    const auto r = detect_regimes(sim.trace);
    REQUIRE(r.bimodal);
    CHECK(r.fast_mean == Catch::Approx(0.007).epsilon(0.05));
    CHECK(r.slow_mean == Catch::Approx(0.009).epsilon(0.05));
    CHECK(label_accuracy(r.labels, sim.truth) >= 0.95);
    CHECK(r.slow_occupancy == Catch::Approx(0.3).margin(0.05));
}

TEST_CASE("close modes below the ratio threshold are unimodal") {
    LatencyModel model;
    model.fast_mean = 0.0080;
    model.slow_mean = 0.0084; // ratio 1.05 < 1.15
    model.jitter_sd = 0.00005;
    model.fast_dwell_mean = 5;
    model.slow_dwell_mean = 5;
    model.seed = 3;
    const auto sim = simulate(model, 5000);
    CHECK_FALSE(detect_regimes(sim.trace).bimodal);
}

TEST_CASE("small traces are always unimodal") {
    Trace t;
    for (int i = 0; i < 19; ++i) t.samples.push_back(i % 2 ? 0.001 : 0.1);
    CHECK_FALSE(detect_regimes(t).bimodal);
}

TEST_CASE("regime detection rejects empty traces") {
    CHECK_THROWS_AS(detect_regimes(Trace{}), ArgumentError);
}

TEST_CASE("tiny minority regimes fall below min_fraction") {
    // Fast mode with a little spread so the percentile-based centers are
    // distinct, plus far outliers whose cluster ends up isolated.
    const auto build = [](std::size_t fast_count, std::size_t slow_count) {
        Trace t;
        for (std::size_t i = 0; i < fast_count; ++i) {
            t.samples.push_back(0.0069 + 0.0000002 * static_cast<double>(i % 1000));
        }
        for (std::size_t i = 0; i < slow_count; ++i) t.samples.push_back(0.1);
        return t;
    };

    const auto sparse = detect_regimes(build(1980, 20)); // 1% < min_fraction
    CHECK_FALSE(sparse.bimodal);

    const auto dense = detect_regimes(build(1900, 100)); // 5% >= min_fraction
    CHECK(dense.bimodal);
    CHECK(dense.slow_occupancy == Catch::Approx(0.05));
}

TEST_CASE("regime detection is scale-equivariant") {
    LatencyModel model;
    model.seed = 77;
    model.fast_dwell_mean = 10;
    model.slow_dwell_mean = 10;
    const auto sim = simulate(model, 2000);
    const auto base = detect_regimes(sim.trace);

    for (double c : {0.5, 3.0, 1000.0}) {
        Trace scaled = sim.trace;
        for (auto& x : scaled.samples) x *= c;
        const auto r = detect_regimes(scaled);
        CHECK(r.bimodal == base.bimodal);
        CHECK(r.labels == base.labels);
        CHECK(r.fast_mean == Catch::Approx(base.fast_mean * c).epsilon(1e-12));
        CHECK(r.slow_mean == Catch::Approx(base.slow_mean * c).epsilon(1e-12));
        CHECK(r.separation_ratio == Catch::Approx(base.separation_ratio).epsilon(1e-9));
    }
}

TEST_CASE("reported means are the cluster means of the reported labels") {
    LatencyModel model;
    model.seed = 5;
    const auto sim = simulate(model, 3000);
    const auto r = detect_regimes(sim.trace);
    REQUIRE(r.bimodal);
    double sum_fast = 0, sum_slow = 0;
    std::size_t n_fast = 0, n_slow = 0;
    for (std::size_t i = 0; i < sim.trace.samples.size(); ++i) {
        if (r.labels[i] == 0) {
            sum_fast += sim.trace.samples[i];
            ++n_fast;
        } else {
            sum_slow += sim.trace.samples[i];
            ++n_slow;
        }
    }
    CHECK(r.fast_mean == Catch::Approx(sum_fast / n_fast).epsilon(1e-12));
    CHECK(r.slow_mean == Catch::Approx(sum_slow / n_slow).epsilon(1e-12));
}

TEST_CASE("run classification thresholds") {
    RegimeAnalysis a;
    a.bimodal = true;
    a.slow_occupancy = 0.8;
    CHECK(classify_run(a) == RunClass::low_performance);
    a.slow_occupancy = 0.1;
    CHECK(classify_run(a) == RunClass::normal);
    a.slow_occupancy = 0.5;
    CHECK(classify_run(a) == RunClass::normal); // threshold is strict
    a.bimodal = false;
    CHECK(classify_run(a) == RunClass::unimodal);
}

TEST_CASE("uniformly dominant run never crosses") {
    Trace a, b;
    a.samples.assign(500, 0.010);
    b.samples.assign(500, 0.008);
    const auto report = compare_runs(a, b);
    CHECK(report.crossover_percentiles.empty());
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        CHECK(report.curve_b[i] < report.curve_a[i]);
    }
    for (const auto& h : report.headline) CHECK(h.leader == 'B');
}

TEST_CASE("self-comparison has zero differences and no crossovers") {
    std::mt19937 rng(8);
    Trace a;
    std::uniform_real_distribution<double> value(0.001, 0.05);
    for (int i = 0; i < 300; ++i) a.samples.push_back(value(rng));
    const auto report = compare_runs(a, a);
    CHECK(report.crossover_percentiles.empty());
    for (std::size_t i = 0; i < report.grid.size(); ++i) CHECK(report.curve_a[i] == report.curve_b[i]);
    for (const auto& h : report.headline) CHECK(h.leader == '-');
}

TEST_CASE("comparison is antisymmetric") {
    LatencyModel fast_model;
    fast_model.seed = 21;
    LatencyModel slow_model;
    slow_model.fast_mean = 0.009;
    slow_model.slow_mean = 0.012;
    slow_model.seed = 22;
    const auto a = simulate(fast_model, 1500).trace;
    const auto b = simulate(slow_model, 1500).trace;

    const auto fwd = compare_runs(a, b);
    const auto rev = compare_runs(b, a);
    REQUIRE(fwd.grid == rev.grid);
    for (std::size_t i = 0; i < fwd.grid.size(); ++i) {
        CHECK(fwd.curve_b[i] - fwd.curve_a[i] == Catch::Approx(-(rev.curve_b[i] - rev.curve_a[i])).margin(1e-15));
    }
    CHECK(fwd.crossover_percentiles == rev.crossover_percentiles);
}

TEST_CASE("averaged percentiles over run lists use the unweighted mean") {
    Trace a1, a2, b;
    a1.samples.assign(10, 0.004);
    a2.samples.assign(1000, 0.008); // longer run must not dominate
    b.samples.assign(50, 0.007);
    const auto report = compare_runs({a1, a2}, {b});
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        CHECK(report.curve_a[i] == Catch::Approx(0.006).epsilon(1e-12));
        CHECK(report.curve_b[i] == Catch::Approx(0.007).epsilon(1e-12));
    }
    // Headline mean pools samples instead: (10*0.004 + 1000*0.008) / 1010.
    CHECK(report.headline[0].a == Catch::Approx((10 * 0.004 + 1000 * 0.008) / 1010.0).epsilon(1e-12));
}

TEST_CASE("comparison argument validation") {
    Trace ok;
    ok.samples.assign(5, 0.01);
    CHECK_THROWS_AS(compare_runs(std::vector<Trace>{}, {ok}), ArgumentError);
    CHECK_THROWS_AS(compare_runs({ok}, {Trace{}}), ArgumentError);
}

TEST_CASE("temporal series identity and smoothing") {
    Trace t;
    t.samples = {3, 1, 2};
    const auto identity = temporal_series(t, 1);
    REQUIRE(identity.size() == 3);
    CHECK(identity[0] == std::pair<std::size_t, double>{0, 3.0});
    CHECK(identity[1] == std::pair<std::size_t, double>{1, 1.0});
    CHECK(identity[2] == std::pair<std::size_t, double>{2, 2.0});

    const auto smoothed = temporal_series(t, 3);
    CHECK(smoothed[0].second == Catch::Approx(2.0));   // mean(3,1)
    CHECK(smoothed[1].second == Catch::Approx(2.0));   // mean(3,1,2)
    CHECK(smoothed[2].second == Catch::Approx(1.5));   // mean(1,2)

    const auto full = temporal_series(t, t.samples.size());
    CHECK(full[1].second == Catch::Approx(2.0)); // center sees the whole trace

    CHECK_THROWS_AS(temporal_series(t, 0), ArgumentError);
    CHECK_THROWS_AS(temporal_series(Trace{}, 1), ArgumentError);
}
