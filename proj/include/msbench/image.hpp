#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "msbench/errors.hpp"

namespace msbench {

/// In-memory RGB image. Pixels are row-major, interleaved RGB, each channel
/// normalized to [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    static constexpr int channels = 3;
    std::vector<float> pixels; // width * height * 3

    float& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    float at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

namespace detail {

/// Reads one PNM header token, skipping whitespace and '#' comments.
inline std::string pnm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            // skip
        } else {
            break;
        }
        ch = in.get();
    }
    if (ch == EOF) throw DecodeError("truncated header: " + path);
    while (ch != EOF && !std::isspace(ch) && ch != '#') {
        tok.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    if (ch == '#') in.unget();
    return tok;
}

inline int pnm_int(std::istream& in, const std::string& path) {
    const std::string tok = pnm_token(in, path);
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DecodeError("bad header field '" + tok + "': " + path);
    }
}

} // namespace detail

/// Decodes a binary PPM (P6) or PGM (P5) file into a normalized RGB image.
/// Grayscale input is replicated across all three channels. Only single-byte
/// samples (maxval <= 255) are supported.
inline Image decode_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open image: " + path.string());
    const std::string p = path.string();

    const std::string magic = detail::pnm_token(in, p);
    if (magic != "P6" && magic != "P5") {
        throw DecodeError("unsupported image format '" + magic + "': " + p);
    }
    const int width = detail::pnm_int(in, p);
    const int height = detail::pnm_int(in, p);
    const int maxval = detail::pnm_int(in, p);
    if (width < 1 || height < 1) throw DecodeError("bad dimensions: " + p);
    if (maxval < 1 || maxval > 255) throw DecodeError("unsupported maxval " + std::to_string(maxval) + ": " + p);
    // The header ends with exactly one whitespace byte before the payload;
    // pnm_int consumed it as the token terminator.

    const int in_channels = (magic == "P6") ? 3 : 1;
    const std::size_t payload = static_cast<std::size_t>(width) * height * in_channels;
    std::vector<unsigned char> raw(payload);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(payload));
    if (static_cast<std::size_t>(in.gcount()) != payload) {
        throw DecodeError("truncated payload: " + p);
    }

    Image img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    const float scale = 1.0f / static_cast<float>(maxval);
    if (in_channels == 3) {
        for (std::size_t i = 0; i < payload; ++i) {
            img.pixels[i] = static_cast<float>(raw[i]) * scale;
        }
    } else {
        for (std::size_t i = 0; i < payload; ++i) {
            const float v = static_cast<float>(raw[i]) * scale;
            img.pixels[i * 3 + 0] = v;
            img.pixels[i * 3 + 1] = v;
            img.pixels[i * 3 + 2] = v;
        }
    }
    return img;
}

/// Writes a binary PPM: "P6\n<w> <h>\n255\n" then w*h*3 bytes, row-major RGB.
inline void write_ppm(const std::filesystem::path& path, int width, int height,
                      const std::vector<unsigned char>& rgb) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write image: " + path.string());
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!out) throw Error("write failed: " + path.string());
}

inline void write_ppm(const std::filesystem::path& path, const Image& img) {
    std::vector<unsigned char> rgb(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const float v = std::clamp(img.pixels[i], 0.0f, 1.0f);
        rgb[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    write_ppm(path, img.width, img.height, rgb);
}

/// Scaled dimension: round-half-away-from-zero, floored at 1.
inline int scaled_dim(int dim, double factor) {
    const long long r = std::llround(static_cast<double>(dim) * factor);
    return static_cast<int>(std::max(1ll, r));
}

/// Bilinear resize by a positive factor. Sample positions use half-pixel
/// centers with edge clamping. A factor of exactly 1.0 is the identity.
inline Image scale_image(const Image& img, double factor) {
    if (!(factor > 0.0)) throw ArgumentError("scale factor must be positive");
    if (factor == 1.0) return img;

    Image out;
    out.width = scaled_dim(img.width, factor);
    out.height = scaled_dim(img.height, factor);
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 3);

    const double x_ratio = static_cast<double>(img.width) / out.width;
    const double y_ratio = static_cast<double>(img.height) / out.height;
    for (int y = 0; y < out.height; ++y) {
        const double sy = (y + 0.5) * y_ratio - 0.5;
        int y0 = static_cast<int>(std::floor(sy));
        const double ty = sy - y0;
        const int y1 = std::clamp(y0 + 1, 0, img.height - 1);
        y0 = std::clamp(y0, 0, img.height - 1);
        for (int x = 0; x < out.width; ++x) {
            const double sx = (x + 0.5) * x_ratio - 0.5;
            int x0 = static_cast<int>(std::floor(sx));
            const double tx = sx - x0;
            const int x1 = std::clamp(x0 + 1, 0, img.width - 1);
            x0 = std::clamp(x0, 0, img.width - 1);
            for (int c = 0; c < 3; ++c) {
                const double top = img.at(x0, y0, c) * (1.0 - tx) + img.at(x1, y0, c) * tx;
                const double bot = img.at(x0, y1, c) * (1.0 - tx) + img.at(x1, y1, c) * tx;
                out.at(x, y, c) = static_cast<float>(top * (1.0 - ty) + bot * ty);
            }
        }
    }
    return out;
}

} // namespace msbench
