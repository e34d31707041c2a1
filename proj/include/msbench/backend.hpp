#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msbench/errors.hpp"
#include "msbench/windows.hpp"

namespace msbench {

/// Per-window class probability vectors. Each row is non-negative and sums
/// to 1 within 1e-6.
struct PredictionSet {
    int class_count = 23;
    std::size_t window_count = 0;
    std::vector<float> probs; // window_count * class_count, row-major

    std::span<const float> row(std::size_t i) const {
        return {probs.data() + i * static_cast<std::size_t>(class_count),
                static_cast<std::size_t>(class_count)};
    }
};

/// Common inference contract. Instances are stateful and must be invoked by
/// one caller at a time; the harness serializes calls.
class Backend {
public:
    virtual ~Backend() = default;

    /// One probability vector per window in the batch.
    virtual PredictionSet infer(const WindowBatch& batch) = 0;

    virtual std::string name() const = 0;

protected:
    static void require_nonempty(const WindowBatch& batch) {
        if (batch.count == 0) throw ArgumentError("inference batch must not be empty");
    }
};

/// Two-regime latency simulator parameters. Dwell means are in calls;
/// a dwell mean of 0 means "never leave that state".
struct LatencyModel {
    double fast_mean = 0.007;
    double slow_mean = 0.009;
    double jitter_sd = 0.0002;
    double fast_dwell_mean = 50.0;
    double slow_dwell_mean = 50.0;
    bool start_slow = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(fast_mean > 0.0)) throw ArgumentError("fast_mean must be positive");
        if (!(slow_mean >= fast_mean)) throw ArgumentError("slow_mean must be >= fast_mean");
        if (jitter_sd < 0.0) throw ArgumentError("jitter_sd must be >= 0");
        if (fast_dwell_mean != 0.0 && fast_dwell_mean < 1.0) throw ArgumentError("fast_dwell_mean must be 0 or >= 1");
        if (slow_dwell_mean != 0.0 && slow_dwell_mean < 1.0) throw ArgumentError("slow_dwell_mean must be 0 or >= 1");
    }
};

/// Selects and configures a backend implementation.
struct BackendDescriptor {
    enum class Kind { reference, synthetic, external };

    Kind kind = Kind::reference;
    std::uint64_t reference_seed = 0; // reference
    LatencyModel latency;             // synthetic
    std::string external_command;     // external
    int class_count = 23;

    static const char* kind_name(Kind k) {
        switch (k) {
            case Kind::reference: return "reference";
            case Kind::synthetic: return "synthetic";
            case Kind::external: return "external";
        }
        return "?";
    }
};

} // namespace msbench
