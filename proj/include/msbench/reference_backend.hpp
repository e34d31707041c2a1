#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "msbench/backend.hpp"
#include "msbench/rng.hpp"

namespace msbench {

/// Deterministic fixed-weight compute kernel standing in for a real
/// segmentation model: one 3x3 valid convolution with 8 output channels
/// (weights derived from the seed), global average pooling, a fixed affine
/// map to 23 logits, and a softmax. The convolution runs over every window
/// position, so compute cost scales with window area.
///
/// Class count is fixed at 23; identical (seed, batch) pairs produce
/// bit-identical outputs.
class ReferenceBackend : public Backend {
public:
    static constexpr int kClassCount = 23;
    static constexpr int kConvChannels = 8;

    explicit ReferenceBackend(std::uint64_t seed = 0)
        : seed_(seed), conv_weights_(make_conv_weights(seed)) {}

    std::string name() const override { return "reference"; }
    std::uint64_t seed() const { return seed_; }

    /// 8 x 3(in) x 3 x 3 kernel values in [-1, 1), derived from the seed.
    static std::vector<float> make_conv_weights(std::uint64_t seed) {
        std::uint64_t state = mix_key(seed, 0x636f6e76); // "conv"
        std::vector<float> w(kConvChannels * 3 * 3 * 3);
        for (auto& v : w) v = unit_float(state);
        return w;
    }

    /// Fixed 23x8 affine weights, independent of the backend seed.
    static const std::array<float, kClassCount * kConvChannels>& affine_weights() {
        static const auto w = [] {
            std::uint64_t state = mix_key(0x6166666e, 23, 8); // "affn"
            std::array<float, kClassCount * kConvChannels> a{};
            for (auto& v : a) v = unit_float(state);
            return a;
        }();
        return w;
    }

    /// Fixed 23-entry affine bias. All-zero input yields softmax(bias).
    static const std::array<float, kClassCount>& affine_bias() {
        static const auto b = [] {
            std::uint64_t state = mix_key(0x62696173, 23, 1); // "bias"
            std::array<float, kClassCount> a{};
            for (auto& v : a) v = unit_float(state);
            return a;
        }();
        return b;
    }

    PredictionSet infer(const WindowBatch& batch) override {
        require_nonempty(batch);
        PredictionSet out;
        out.class_count = kClassCount;
        out.window_count = batch.count;
        out.probs.resize(batch.count * kClassCount);

        const int side = batch.side;
        std::vector<float> planes(3 * static_cast<std::size_t>(side) * side);
        for (std::size_t w = 0; w < batch.count; ++w) {
            to_planar(batch.window(w), side, planes);
            std::array<double, kConvChannels> features{};
            conv_gap(planes, side, features);
            write_probs(features, &out.probs[w * kClassCount]);
        }
        return out;
    }

private:
    static float unit_float(std::uint64_t& state) {
        // Top 24 bits -> [0,1) -> [-1,1); exact in float.
        const std::uint32_t bits = static_cast<std::uint32_t>(splitmix64_next(state) >> 40);
        return static_cast<float>(bits) * 0x1.0p-23f - 1.0f;
    }

    static void to_planar(std::span<const float> window, int side, std::vector<float>& planes) {
        const std::size_t plane = static_cast<std::size_t>(side) * side;
        for (std::size_t i = 0; i < plane; ++i) {
            planes[i] = window[i * 3 + 0];
            planes[plane + i] = window[i * 3 + 1];
            planes[2 * plane + i] = window[i * 3 + 2];
        }
    }

    void conv_gap(const std::vector<float>& planes, int side, std::array<double, kConvChannels>& features) const {
        const int out_dim = side - 2;
        if (out_dim <= 0) {
            features.fill(0.0); // window too small for a valid 3x3 tap
            return;
        }
        const std::size_t plane = static_cast<std::size_t>(side) * side;
        for (int oc = 0; oc < kConvChannels; ++oc) {
            const float* w = &conv_weights_[static_cast<std::size_t>(oc) * 27];
            double acc = 0.0;
            for (int y = 0; y < out_dim; ++y) {
                for (int x = 0; x < out_dim; ++x) {
                    float v = 0.0f;
                    for (int ic = 0; ic < 3; ++ic) {
                        const float* p = &planes[ic * plane + static_cast<std::size_t>(y) * side + x];
                        const float* k = w + ic * 9;
                        v += k[0] * p[0] + k[1] * p[1] + k[2] * p[2];
                        v += k[3] * p[side] + k[4] * p[side + 1] + k[5] * p[side + 2];
                        v += k[6] * p[2 * side] + k[7] * p[2 * side + 1] + k[8] * p[2 * side + 2];
                    }
                    acc += v;
                }
            }
            features[oc] = acc / (static_cast<double>(out_dim) * out_dim);
        }
    }

    static void write_probs(const std::array<double, kConvChannels>& features, float* out) {
        const auto& aw = affine_weights();
        const auto& ab = affine_bias();
        std::array<double, kClassCount> logits;
        for (int k = 0; k < kClassCount; ++k) {
            double v = ab[k];
            for (int f = 0; f < kConvChannels; ++f) v += static_cast<double>(aw[k * kConvChannels + f]) * features[f];
            logits[k] = v;
        }
        double m = logits[0];
        for (double v : logits) m = std::max(m, v);
        double sum = 0.0;
        std::array<double, kClassCount> e;
        for (int k = 0; k < kClassCount; ++k) {
            e[k] = std::exp(logits[k] - m);
            sum += e[k];
        }
        for (int k = 0; k < kClassCount; ++k) out[k] = static_cast<float>(e[k] / sum);
    }

    std::uint64_t seed_;
    std::vector<float> conv_weights_;
};

} // namespace msbench
