#include <chrono>
#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "msbench/backend_factory.hpp"
#include "test_util.hpp"

using namespace msbench;

namespace {

WindowBatch make_batch(std::size_t count, int side, unsigned seed) {
    WindowBatch batch;
    batch.side = side;
    batch.count = count;
    const Image img = test_util::random_image(side, static_cast<int>(count) * side, seed);
    batch.data = img.pixels;
    batch.per_scale_counts = {{1.0, count}};
    return batch;
}

WindowBatch zero_batch(std::size_t count, int side) {
    WindowBatch batch;
    batch.side = side;
    batch.count = count;
    batch.data.assign(count * static_cast<std::size_t>(side) * side * 3, 0.0f);
    batch.per_scale_counts = {{1.0, count}};
    return batch;
}

} // namespace

TEST_CASE("reference backend emits normalized 23-class vectors") {
    ReferenceBackend backend(42);
    const auto batch = make_batch(4, 32, 1);
    const PredictionSet out = backend.infer(batch);
    REQUIRE(out.class_count == 23);
    REQUIRE(out.window_count == 4);
    REQUIRE(out.probs.size() == 4u * 23u);
    for (std::size_t w = 0; w < out.window_count; ++w) {
        double sum = 0.0;
        for (float v : out.row(w)) {
            CHECK(v >= 0.0f);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
}

TEST_CASE("reference backend is bit-deterministic per (seed, batch)") {
    const auto batch = make_batch(3, 24, 9);
    ReferenceBackend a(7), b(7), c(8);
    const auto out1 = a.infer(batch);
    const auto out2 = a.infer(batch); // same instance, repeated call
    const auto out3 = b.infer(batch); // fresh instance, same seed
    CHECK(out1.probs == out2.probs);
    CHECK(out1.probs == out3.probs);
    CHECK(c.infer(batch).probs != out1.probs); // different seed, different weights
}

TEST_CASE("all-zero window yields softmax of the fixed affine bias") {
    ReferenceBackend backend(1234);
    const auto out = backend.infer(zero_batch(1, 16));

    const auto& bias = ReferenceBackend::affine_bias();
    double m = bias[0];
    for (double v : bias) m = std::max(m, v);
    double sum = 0.0;
    std::array<double, 23> e{};
    for (int k = 0; k < 23; ++k) {
        e[k] = std::exp(static_cast<double>(bias[k]) - m);
        sum += e[k];
    }
    for (int k = 0; k < 23; ++k) {
        CHECK(out.probs[k] == Catch::Approx(e[k] / sum).margin(1e-7));
    }
}

TEST_CASE("distinct windows produce distinct outputs") {
    ReferenceBackend backend(5);
    const auto batch = make_batch(6, 20, 77);
    const auto out = backend.infer(batch);
    for (std::size_t i = 1; i < out.window_count; ++i) {
        const auto a = out.row(0);
        const auto b = out.row(i);
        CHECK(!std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST_CASE("synthetic backend: no jitter, never switch") {
    LatencyModel model;
    model.fast_mean = 0.007;
    model.slow_mean = 0.009;
    model.jitter_sd = 0.0;
    model.fast_dwell_mean = 0; // never leave fast
    model.slow_dwell_mean = 0;
    SyntheticBackend backend(model);
    for (int i = 0; i < 200; ++i) {
        CHECK(backend.sample_duration() == 0.007);
    }
    CHECK(backend.state_trace() == std::vector<int>(200, 0));
}

TEST_CASE("synthetic backend sequences are seed-deterministic") {
    LatencyModel model;
    model.jitter_sd = 0.0003;
    model.fast_dwell_mean = 4;
    model.slow_dwell_mean = 4;
    model.seed = 2718;
    SyntheticBackend a(model), b(model);
    for (int i = 0; i < 500; ++i) a.sample_duration();
    for (int i = 0; i < 500; ++i) b.sample_duration();
    CHECK(a.intended_durations() == b.intended_durations());
    CHECK(a.state_trace() == b.state_trace());
}

TEST_CASE("dwell means set stationary occupancy") {
    LatencyModel model;
    model.fast_dwell_mean = 9;
    model.slow_dwell_mean = 1;
    model.jitter_sd = 0.0;
    model.seed = 424242;
    SyntheticBackend backend(model);
    for (int i = 0; i < 10000; ++i) backend.sample_duration();
    const auto& states = backend.state_trace();
    const double slow_occupancy =
        static_cast<double>(std::count(states.begin(), states.end(), 1)) / static_cast<double>(states.size());
    CHECK(slow_occupancy == Catch::Approx(0.10).margin(0.02));
}

TEST_CASE("per-state mean within three standard errors of the configured mean") {
    LatencyModel model;
    model.fast_mean = 0.0070;
    model.slow_mean = 0.0090;
    model.jitter_sd = 0.0002;
    model.fast_dwell_mean = 5;
    model.slow_dwell_mean = 5;
    model.seed = 99;
    SyntheticBackend backend(model);
    for (int i = 0; i < 12000; ++i) backend.sample_duration();

    const auto& states = backend.state_trace();
    const auto& durations = backend.intended_durations();
    for (int state : {0, 1}) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < durations.size(); ++i) {
            if (states[i] == state) {
                sum += durations[i];
                ++n;
            }
        }
        REQUIRE(n > 100);
        const double mean = sum / static_cast<double>(n);
        const double expected = state == 0 ? model.fast_mean : model.slow_mean;
        const double se = model.jitter_sd / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(mean - expected) <= 3.0 * se);
    }
}

TEST_CASE("synthetic infer sleeps at least the intended duration and returns uniform vectors") {
    LatencyModel model;
    model.fast_mean = 0.002;
    model.slow_mean = 0.002;
    model.jitter_sd = 0.0;
    model.fast_dwell_mean = 0;
    SyntheticBackend backend(model);
    const auto batch = make_batch(2, 8, 3);

    const auto t0 = std::chrono::steady_clock::now();
    const auto out = backend.infer(batch);
    const double measured = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    REQUIRE(backend.intended_durations().size() == 1);
    CHECK(measured >= backend.intended_durations()[0]);
    REQUIRE(out.window_count == 2);
    REQUIRE(out.class_count == 23);
    for (float v : out.probs) CHECK(v == Catch::Approx(1.0f / 23.0f));
}

TEST_CASE("latency model validation") {
    LatencyModel bad;
    bad.fast_mean = 0.0;
    CHECK_THROWS_AS(SyntheticBackend(bad), ArgumentError);
    bad = LatencyModel{};
    bad.slow_mean = 0.001; // below fast
    CHECK_THROWS_AS(SyntheticBackend(bad), ArgumentError);
    bad = LatencyModel{};
    bad.jitter_sd = -1;
    CHECK_THROWS_AS(SyntheticBackend(bad), ArgumentError);
    bad = LatencyModel{};
    bad.fast_dwell_mean = 0.5; // 0 or >= 1
    CHECK_THROWS_AS(SyntheticBackend(bad), ArgumentError);
}

TEST_CASE("backends reject empty batches") {
    WindowBatch empty;
    empty.side = 8;
    ReferenceBackend ref(0);
    CHECK_THROWS_AS(ref.infer(empty), ArgumentError);
    SyntheticBackend syn((LatencyModel()));
    CHECK_THROWS_AS(syn.infer(empty), ArgumentError);
}

TEST_CASE("factory builds the requested kind") {
    BackendDescriptor desc;
    desc.kind = BackendDescriptor::Kind::reference;
    CHECK(make_backend(desc)->name() == "reference");
    desc.kind = BackendDescriptor::Kind::synthetic;
    CHECK(make_backend(desc)->name() == "synthetic");
}
