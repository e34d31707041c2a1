#pragma once

#include <chrono>
#include <thread>
#include <vector>

#include "msbench/backend.hpp"
#include "msbench/rng.hpp"

namespace msbench {

/// Latency simulator: a two-state semi-Markov chain (fast/slow) with
/// geometric dwell times, normal jitter around each state's mean, and
/// uniform probability vectors as output. infer() actually sleeps for the
/// sampled duration so real clock measurement is exercised; the intended
/// durations and ground-truth state labels are recorded per call.
class SyntheticBackend : public Backend {
public:
    explicit SyntheticBackend(const LatencyModel& model, int class_count = 23)
        : model_(model), class_count_(class_count), rng_(model.seed), slow_(model.start_slow) {
        model_.validate();
        if (class_count_ < 1) throw ArgumentError("class count must be >= 1");
    }

    std::string name() const override { return "synthetic"; }
    const LatencyModel& model() const { return model_; }

    /// Advances the chain one call and returns the intended duration in
    /// seconds without sleeping. With jitter_sd == 0 the duration is the
    /// state mean exactly and no randomness is consumed for it.
    double sample_duration() {
        state_trace_.push_back(slow_ ? 1 : 0);
        const double mean = slow_ ? model_.slow_mean : model_.fast_mean;
        double duration = mean;
        if (model_.jitter_sd > 0.0) {
            duration = std::max(kMinDuration, rng_.normal(mean, model_.jitter_sd));
        }
        intended_.push_back(duration);
        advance_state();
        return duration;
    }

    PredictionSet infer(const WindowBatch& batch) override {
        require_nonempty(batch);
        const double duration = sample_duration();
        std::this_thread::sleep_for(std::chrono::duration<double>(duration));

        PredictionSet out;
        out.class_count = class_count_;
        out.window_count = batch.count;
        out.probs.assign(batch.count * static_cast<std::size_t>(class_count_),
                         1.0f / static_cast<float>(class_count_));
        return out;
    }

    /// Intended (pre-sleep) duration of every call so far, in call order.
    const std::vector<double>& intended_durations() const { return intended_; }

    /// Ground-truth state per call: 0 fast, 1 slow.
    const std::vector<int>& state_trace() const { return state_trace_; }

private:
    static constexpr double kMinDuration = 1e-9;

    void advance_state() {
        const double dwell = slow_ ? model_.slow_dwell_mean : model_.fast_dwell_mean;
        if (dwell <= 0.0) return; // dwell 0: never leave this state
        if (rng_.uniform() * dwell < 1.0) slow_ = !slow_;
    }

    LatencyModel model_;
    int class_count_;
    RandomStream rng_;
    bool slow_;
    std::vector<double> intended_;
    std::vector<int> state_trace_;
};

} // namespace msbench
