#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "msbench/image.hpp"

namespace test_util {

namespace fs = std::filesystem;

/// Self-deleting temporary directory.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "msbench") {
        static std::atomic<unsigned> counter{0};
        const auto base = fs::temp_directory_path();
        path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Image with deterministic pseudo-random pixels.
inline msbench::Image random_image(int width, int height, unsigned seed) {
    msbench::Image img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (auto& v : img.pixels) v = dist(rng);
    return img;
}

inline msbench::Image constant_image(int width, int height, float value) {
    msbench::Image img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height * 3, value);
    return img;
}

} // namespace test_util
