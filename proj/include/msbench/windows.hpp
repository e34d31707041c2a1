#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msbench/errors.hpp"
#include "msbench/image.hpp"

namespace msbench {

/// Ordered set of positive resampling factors applied to each input image.
struct ScaleSet {
    std::vector<double> factors;

    /// Down by 1/sqrt(2), identity, up by sqrt(2).
    static ScaleSet defaults() {
        return ScaleSet{{1.0 / std::sqrt(2.0), 1.0, std::sqrt(2.0)}};
    }

    void validate() const {
        if (factors.empty()) throw ArgumentError("scale set must not be empty");
        for (double f : factors) {
            if (!(f > 0.0)) throw ArgumentError("scale factors must be positive");
        }
    }
};

/// Square crop geometry: side length and stride in pixels.
struct WindowSpec {
    int window = 224;
    int stride = 112;

    void validate() const {
        if (window < 1) throw ArgumentError("window side must be >= 1");
        if (stride < 1) throw ArgumentError("stride must be >= 1");
    }
};

/// Number of window positions along one axis. An axis shorter than the
/// window yields exactly one (padded) position.
inline int window_axis_count(int axis_len, int window, int stride) {
    if (axis_len < window) return 1;
    return (axis_len - window) / stride + 1;
}

/// Top-left offsets of every window, row-major (y outer). Offsets are in
/// padded coordinates when an axis is shorter than the window.
inline std::vector<std::pair<int, int>> window_offsets(int width, int height, const WindowSpec& spec) {
    spec.validate();
    const int nx = window_axis_count(width, spec.window, spec.stride);
    const int ny = window_axis_count(height, spec.window, spec.stride);
    std::vector<std::pair<int, int>> offsets;
    offsets.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            offsets.emplace_back(i * spec.stride, j * spec.stride);
        }
    }
    return offsets;
}

namespace detail {

/// Pads any axis shorter than the window to exactly the window size,
/// splitting the margin symmetrically and replicating edge pixels.
inline Image pad_to_window(const Image& img, int window) {
    if (img.width >= window && img.height >= window) return img;
    Image out;
    out.width = std::max(img.width, window);
    out.height = std::max(img.height, window);
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 3);
    const int pad_left = (out.width - img.width) / 2;
    const int pad_top = (out.height - img.height) / 2;
    for (int y = 0; y < out.height; ++y) {
        const int sy = std::clamp(y - pad_top, 0, img.height - 1);
        for (int x = 0; x < out.width; ++x) {
            const int sx = std::clamp(x - pad_left, 0, img.width - 1);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
        }
    }
    return out;
}

} // namespace detail

/// Crops all windows from one image. Each window is a window*window*3
/// tensor in row-major interleaved-RGB layout; crops are exact copies.
inline std::vector<std::vector<float>> generate_windows(const Image& img, const WindowSpec& spec) {
    spec.validate();
    Image padded;
    const Image* view = &img;
    if (img.width < spec.window || img.height < spec.window) {
        padded = detail::pad_to_window(img, spec.window);
        view = &padded;
    }

    const auto offsets = window_offsets(view->width, view->height, spec);
    const std::size_t window_values = static_cast<std::size_t>(spec.window) * spec.window * 3;
    std::vector<std::vector<float>> windows;
    windows.reserve(offsets.size());
    const std::size_t row_values = static_cast<std::size_t>(spec.window) * 3;
    for (const auto& [ox, oy] : offsets) {
        std::vector<float> w(window_values);
        for (int y = 0; y < spec.window; ++y) {
            const float* src_row = &view->pixels[((static_cast<std::size_t>(oy) + y) * view->width + ox) * 3];
            std::copy(src_row, src_row + row_values, &w[static_cast<std::size_t>(y) * row_values]);
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

/// All windows from one image's scale pyramid, flattened into a single
/// batch for one backend invocation.
struct WindowBatch {
    std::string source;
    int side = 0;
    std::size_t count = 0;
    std::vector<float> data; // count * side*side*3, window-major
    std::vector<std::pair<double, std::size_t>> per_scale_counts;

    std::size_t values_per_window() const {
        return static_cast<std::size_t>(side) * side * 3;
    }

    std::span<const float> window(std::size_t i) const {
        return {data.data() + i * values_per_window(), values_per_window()};
    }
};

/// Builds the batch: windows of every scaled image, concatenated in
/// ScaleSet order.
inline WindowBatch build_batch(const Image& img, const ScaleSet& scales, const WindowSpec& spec,
                               std::string source = {}) {
    scales.validate();
    spec.validate();
    WindowBatch batch;
    batch.source = std::move(source);
    batch.side = spec.window;
    for (double f : scales.factors) {
        const Image scaled = scale_image(img, f);
        auto windows = generate_windows(scaled, spec);
        batch.per_scale_counts.emplace_back(f, windows.size());
        for (auto& w : windows) {
            batch.data.insert(batch.data.end(), w.begin(), w.end());
        }
        batch.count += windows.size();
    }
    return batch;
}

} // namespace msbench
