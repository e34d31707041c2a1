#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msbench/errors.hpp"
#include "msbench/image.hpp"
#include "msbench/rng.hpp"

namespace msbench {

namespace fs = std::filesystem;

/// One category subdirectory: name and its image files in byte-lexicographic
/// filename order.
struct CategoryDir {
    std::string name;
    std::vector<fs::path> images;

    std::size_t count() const { return images.size(); }
};

/// Result of scanning a dataset root. Directories are sorted by name so a
/// run's iteration order never depends on filesystem enumeration order.
struct DatasetManifest {
    fs::path root;
    std::vector<CategoryDir> directories;
    std::size_t total_images = 0;
    std::vector<std::string> warnings;
};

/// Optional shape expectations for a 23-category, 2500-per-category,
/// 362x362 dataset layout. Absent fields are not checked.
struct LayoutExpectation {
    std::optional<std::size_t> expected_categories = 23;
    std::optional<std::size_t> expected_per_category = 2500;
    std::optional<std::pair<int, int>> expected_dims = std::make_pair(362, 362);

    static LayoutExpectation none() { return {std::nullopt, std::nullopt, std::nullopt}; }
};

struct LayoutViolation {
    enum class Kind { category_count, per_category_count, dimensions, probe_decode };
    Kind kind;
    std::string subject; // directory or dataset-level label
    std::string detail;
};

struct ValidationReport {
    std::vector<LayoutViolation> violations;
    bool conformant() const { return violations.empty(); }
};

namespace detail {

inline bool recognized_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".ppm" || ext == ".pgm" || ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

} // namespace detail

/// Walks the immediate subdirectories of `root` and lists every recognized
/// image file. Empty subdirectories are skipped; nested directories and
/// files directly under the root are ignored (nesting with a warning).
inline DatasetManifest scan_dataset(const fs::path& root) {
    std::error_code ec;
    if (!fs::exists(root, ec) || ec) throw DatasetError("dataset root does not exist: " + root.string());
    if (!fs::is_directory(root, ec) || ec) throw DatasetError("dataset root is not a directory: " + root.string());

    DatasetManifest manifest;
    manifest.root = root;

    try {
        std::vector<fs::path> subdirs;
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_directory()) subdirs.push_back(entry.path());
        }
        std::sort(subdirs.begin(), subdirs.end(), [](const fs::path& a, const fs::path& b) {
            return a.filename().string() < b.filename().string();
        });

        for (const auto& dir : subdirs) {
            CategoryDir cat;
            cat.name = dir.filename().string();
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.is_directory()) {
                    manifest.warnings.push_back("ignoring nested directory: " + entry.path().string());
                    continue;
                }
                if (entry.is_regular_file() && detail::recognized_image_extension(entry.path())) {
                    cat.images.push_back(entry.path());
                }
            }
            if (cat.images.empty()) continue;
            std::sort(cat.images.begin(), cat.images.end(), [](const fs::path& a, const fs::path& b) {
                return a.filename().string() < b.filename().string();
            });
            manifest.total_images += cat.images.size();
            manifest.directories.push_back(std::move(cat));
        }
    } catch (const fs::filesystem_error& e) {
        throw DatasetError("dataset root unreadable: " + root.string() + " (" + e.what() + ")");
    }

    if (manifest.total_images == 0) {
        throw DatasetError("empty dataset: no image files under " + root.string());
    }
    return manifest;
}

/// Checks a manifest against a layout expectation. Violations are collected,
/// never thrown; an undecodable probe image is itself a violation.
inline ValidationReport validate_layout(const DatasetManifest& manifest, const LayoutExpectation& expect) {
    ValidationReport report;
    if (expect.expected_categories && manifest.directories.size() != *expect.expected_categories) {
        report.violations.push_back({LayoutViolation::Kind::category_count, manifest.root.string(),
                                     "expected " + std::to_string(*expect.expected_categories) +
                                         " categories, found " + std::to_string(manifest.directories.size())});
    }
    if (expect.expected_per_category) {
        for (const auto& dir : manifest.directories) {
            if (dir.count() != *expect.expected_per_category) {
                report.violations.push_back({LayoutViolation::Kind::per_category_count, dir.name,
                                             "expected " + std::to_string(*expect.expected_per_category) +
                                                 " images, found " + std::to_string(dir.count())});
            }
        }
    }
    if (expect.expected_dims) {
        const auto [ew, eh] = *expect.expected_dims;
        for (const auto& dir : manifest.directories) {
            try {
                const Image probe = decode_image(dir.images.front());
                if (probe.width != ew || probe.height != eh) {
                    report.violations.push_back({LayoutViolation::Kind::dimensions, dir.name,
                                                 "expected " + std::to_string(ew) + "x" + std::to_string(eh) +
                                                     ", found " + std::to_string(probe.width) + "x" +
                                                     std::to_string(probe.height)});
                }
            } catch (const DecodeError& e) {
                report.violations.push_back({LayoutViolation::Kind::probe_decode, dir.name, e.what()});
            }
        }
    }
    return report;
}

/// Parameters for the synthetic dataset generator.
struct SyntheticDatasetSpec {
    std::size_t categories = 23;
    std::size_t images_per_category = 10;
    int width = 362;
    int height = 362;
};

namespace detail {

/// Category names follow the MINC material vocabulary for the first 23
/// directories, then fall back to numbered names.
inline std::string synthetic_category_name(std::size_t index) {
    static constexpr std::array<const char*, 23> kMaterials = {
        "brick",   "carpet",  "ceramic",       "fabric", "foliage", "food",      "glass", "hair",
        "leather", "metal",   "mirror",        "other",  "painted", "paper",     "plastic",
        "polishedstone", "skin", "sky",        "stone",  "tile",    "wallpaper", "water", "wood"};
    if (index < kMaterials.size()) return kMaterials[index];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cat_%04zu", index);
    return buf;
}

} // namespace detail

/// Writes a deterministic synthetic dataset: `categories` subdirectories of
/// binary PPM images with pseudo-random pixels keyed by
/// (seed, category index, image index). Same spec and seed produce a
/// byte-identical tree.
inline DatasetManifest gen_synthetic_dataset(const SyntheticDatasetSpec& spec, std::uint64_t seed,
                                             const fs::path& out_root) {
    if (spec.categories < 1 || spec.images_per_category < 1 || spec.width < 1 || spec.height < 1) {
        throw ArgumentError("synthetic dataset spec counts must be >= 1");
    }
    std::error_code ec;
    fs::create_directories(out_root, ec);
    if (ec) throw Error("cannot create dataset root: " + out_root.string());

    const std::size_t bytes_per_image = static_cast<std::size_t>(spec.width) * spec.height * 3;
    std::vector<unsigned char> rgb(bytes_per_image);
    for (std::size_t cat = 0; cat < spec.categories; ++cat) {
        const std::string name = detail::synthetic_category_name(cat);
        const fs::path dir = out_root / name;
        fs::create_directories(dir, ec);
        if (ec) throw Error("cannot create category directory: " + dir.string());
        for (std::size_t idx = 0; idx < spec.images_per_category; ++idx) {
            std::uint64_t state = mix_key(seed, cat, idx);
            std::size_t i = 0;
            while (i < bytes_per_image) {
                std::uint64_t word = splitmix64_next(state);
                for (int b = 0; b < 8 && i < bytes_per_image; ++b, ++i) {
                    rgb[i] = static_cast<unsigned char>(word & 0xFF);
                    word >>= 8;
                }
            }
            char fname[64];
            std::snprintf(fname, sizeof(fname), "%s_%06zu.ppm", name.c_str(), idx);
            write_ppm(dir / fname, spec.width, spec.height, rgb);
        }
    }
    return scan_dataset(out_root);
}

} // namespace msbench
