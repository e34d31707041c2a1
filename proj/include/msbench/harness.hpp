#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "msbench/backend_factory.hpp"
#include "msbench/dataset.hpp"
#include "msbench/errors.hpp"
#include "msbench/image.hpp"
#include "msbench/windows.hpp"

namespace msbench {

/// Resolved configuration of one benchmark run. Echoed into the RunSummary
/// so a run can be reproduced exactly.
struct RunConfig {
    fs::path dataset_root;
    ScaleSet scales = ScaleSet::defaults();
    WindowSpec window_spec{};
    BackendDescriptor backend{};
    fs::path out_dir = "msbench_out";
    bool progress = true;
    bool prefetch = true;

    std::string describe() const {
        char buf[128];
        std::string s;
        const auto num = [&buf](double v) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        s += "dataset_root=" + dataset_root.string() + "\n";
        s += "scales=";
        for (std::size_t i = 0; i < scales.factors.size(); ++i) {
            if (i) s += ",";
            s += num(scales.factors[i]);
        }
        s += "\n";
        s += "window=" + std::to_string(window_spec.window) + "\n";
        s += "stride=" + std::to_string(window_spec.stride) + "\n";
        s += std::string("backend=") + BackendDescriptor::kind_name(backend.kind) + "\n";
        switch (backend.kind) {
            case BackendDescriptor::Kind::reference:
                s += "reference_seed=" + std::to_string(backend.reference_seed) + "\n";
                break;
            case BackendDescriptor::Kind::synthetic: {
                const auto& m = backend.latency;
                s += "synthetic_fast=" + num(m.fast_mean) + "\n";
                s += "synthetic_slow=" + num(m.slow_mean) + "\n";
                s += "synthetic_jitter=" + num(m.jitter_sd) + "\n";
                s += "synthetic_fast_dwell=" + num(m.fast_dwell_mean) + "\n";
                s += "synthetic_slow_dwell=" + num(m.slow_dwell_mean) + "\n";
                s += std::string("synthetic_start=") + (m.start_slow ? "slow" : "fast") + "\n";
                s += "seed=" + std::to_string(m.seed) + "\n";
                break;
            }
            case BackendDescriptor::Kind::external:
                s += "external_command=" + backend.external_command + "\n";
                break;
        }
        s += "class_count=" + std::to_string(backend.class_count) + "\n";
        s += "out_dir=" + out_dir.string() + "\n";
        s += std::string("progress=") + (progress ? "on" : "off") + "\n";
        s += std::string("prefetch=") + (prefetch ? "on" : "off") + "\n";
        return s;
    }
};

/// One timed model invocation for one image.
struct TimingRecord {
    std::string image_path;
    std::string directory_name;
    std::size_t ordinal_in_directory = 0;
    double model_seconds = 0.0;
    std::size_t window_count = 0;
    double capture_seconds = 0.0; // monotonic, relative to run start
};

/// A directory's records plus its wall time. The average model time skips
/// the first record (model warmup lands there) and is absent when the
/// exclusion leaves no samples.
struct DirectoryTiming {
    std::string directory_name;
    std::vector<TimingRecord> records;
    double wall_seconds = 0.0;
    std::optional<double> avg_model_seconds;
};

struct ProgressEvent {
    std::size_t processed = 0;
    std::size_t total = 0;
    double elapsed_seconds = 0.0;
    double images_per_second = 0.0;
};

struct RunSummary {
    std::vector<DirectoryTiming> directories;
    std::optional<double> global_avg_model_seconds;
    std::size_t total_images = 0; // number of timing records
    RunConfig config_echo;
    std::vector<std::string> warnings;
    std::vector<ProgressEvent> progress_events;
};

/// Computes a directory's excluded-first average.
inline DirectoryTiming directory_summary(std::string directory_name, std::vector<TimingRecord> records,
                                         double wall_seconds) {
    DirectoryTiming dt;
    dt.directory_name = std::move(directory_name);
    dt.records = std::move(records);
    dt.wall_seconds = wall_seconds;
    if (dt.records.size() >= 2) {
        double sum = 0.0;
        for (std::size_t i = 1; i < dt.records.size(); ++i) sum += dt.records[i].model_seconds;
        dt.avg_model_seconds = sum / static_cast<double>(dt.records.size() - 1);
    }
    return dt;
}

/// Pools every record with ordinal >= 1 across directories; this is not the
/// mean of the per-directory averages.
inline RunSummary summarize_run(std::vector<DirectoryTiming> directories) {
    RunSummary summary;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& dir : directories) {
        summary.total_images += dir.records.size();
        for (std::size_t i = 1; i < dir.records.size(); ++i) {
            sum += dir.records[i].model_seconds;
            ++n;
        }
    }
    if (n > 0) summary.global_avg_model_seconds = sum / static_cast<double>(n);
    summary.directories = std::move(directories);
    return summary;
}

/// Times exactly the infer() call on a monotonic clock; nothing else is
/// inside the measured interval. Ordinal is assigned by the caller.
inline TimingRecord time_invocation(Backend& backend, const WindowBatch& batch,
                                    std::chrono::steady_clock::time_point run_epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)backend.infer(batch);
    const auto t1 = std::chrono::steady_clock::now();

    TimingRecord rec;
    rec.image_path = batch.source;
    rec.model_seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.window_count = batch.count;
    rec.capture_seconds = std::chrono::duration<double>(t1 - run_epoch).count();
    return rec;
}

/// Per-image progress accounting. Every processed image is one iteration;
/// events are always recorded, rendering is the caller's concern.
class ProgressTracker {
public:
    explicit ProgressTracker(std::size_t total, std::function<double()> elapsed_fn = {})
        : total_(total), elapsed_fn_(std::move(elapsed_fn)), start_(std::chrono::steady_clock::now()) {}

    ProgressEvent tick() {
        ++processed_;
        ProgressEvent ev;
        ev.processed = processed_;
        ev.total = total_;
        ev.elapsed_seconds = elapsed_fn_ ? elapsed_fn_()
                                         : std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
                                               .count();
        ev.images_per_second = ev.elapsed_seconds > 0.0 ? static_cast<double>(processed_) / ev.elapsed_seconds : 0.0;
        events_.push_back(ev);
        return ev;
    }

    const std::vector<ProgressEvent>& events() const { return events_; }

private:
    std::size_t total_;
    std::size_t processed_ = 0;
    std::function<double()> elapsed_fn_;
    std::chrono::steady_clock::time_point start_;
    std::vector<ProgressEvent> events_;
};

/// Renders one progress event as a single bar line (no trailing newline).
inline std::string render_progress(const ProgressEvent& ev, int bar_width = 28) {
    const double fraction = ev.total > 0 ? static_cast<double>(ev.processed) / static_cast<double>(ev.total) : 0.0;
    const int filled = static_cast<int>(fraction * bar_width);
    std::string bar(static_cast<std::size_t>(bar_width), '-');
    for (int i = 0; i < filled && i < bar_width; ++i) bar[static_cast<std::size_t>(i)] = '#';
    char buf[160];
    std::snprintf(buf, sizeof(buf), "[%s] %zu/%zu (%.1f%%) %.2f img/s elapsed %.1fs", bar.c_str(), ev.processed,
                  ev.total, fraction * 100.0, ev.images_per_second, ev.elapsed_seconds);
    return buf;
}

struct RunCallbacks {
    std::function<void(const ProgressEvent&)> on_progress;
    std::function<void(const DirectoryTiming&)> on_directory;
    std::function<void(const std::string&)> on_warning;
};

namespace detail {

struct PipelineItem {
    std::size_t dir_index = 0;
    std::string directory_name;
    std::string image_path;
    WindowBatch batch;
    bool decode_ok = false;
    std::string warning;
};

/// Single-producer single-consumer bounded queue for decode prefetch.
class BoundedItemQueue {
public:
    explicit BoundedItemQueue(std::size_t capacity) : capacity_(capacity) {}

    bool push(PipelineItem item) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return queue_.size() < capacity_ || aborted_; });
        if (aborted_) return false;
        queue_.push_back(std::move(item));
        not_empty_.notify_one();
        return true;
    }

    std::optional<PipelineItem> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !queue_.empty() || closed_ || aborted_; });
        if (queue_.empty()) return std::nullopt;
        PipelineItem item = std::move(queue_.front());
        queue_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
    }

    void abort() {
        std::lock_guard lock(mutex_);
        aborted_ = true;
        not_full_.notify_all();
        not_empty_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::deque<PipelineItem> queue_;
    std::size_t capacity_;
    bool closed_ = false;
    bool aborted_ = false;
};

inline PipelineItem make_pipeline_item(std::size_t dir_index, const CategoryDir& dir, const fs::path& image,
                                       const ScaleSet& scales, const WindowSpec& spec) {
    PipelineItem item;
    item.dir_index = dir_index;
    item.directory_name = dir.name;
    item.image_path = image.string();
    try {
        const Image img = decode_image(image);
        item.batch = build_batch(img, scales, spec, image.string());
        item.decode_ok = true;
    } catch (const Error& e) {
        item.warning = std::string("skipping image: ") + e.what();
    }
    return item;
}

} // namespace detail

/// Runs the full benchmark: walk the manifest directory by directory,
/// decode and window each image, time one backend invocation per image,
/// and accumulate excluded-first averages.
///
/// Decode failures skip the image with a warning; backend construction or
/// inference failures abort the run. When cfg.prefetch is set, decoding and
/// windowing of upcoming images overlaps the timed invocation through a
/// bounded queue; the measured interval still contains only infer().
inline RunSummary run_benchmark(const RunConfig& cfg, Backend& backend, const RunCallbacks& callbacks = {}) {
    cfg.scales.validate();
    cfg.window_spec.validate();
    const DatasetManifest manifest = scan_dataset(cfg.dataset_root);

    RunSummary summary;
    summary.config_echo = cfg;
    for (const auto& w : manifest.warnings) {
        summary.warnings.push_back(w);
        if (callbacks.on_warning) callbacks.on_warning(w);
    }

    ProgressTracker tracker(manifest.total_images);
    const auto run_epoch = std::chrono::steady_clock::now();

    std::vector<DirectoryTiming> directories;
    std::vector<TimingRecord> current_records;
    std::size_t current_dir = static_cast<std::size_t>(-1);
    std::string current_name;
    auto dir_start = run_epoch;

    const auto finish_directory = [&](std::chrono::steady_clock::time_point now) {
        if (current_dir == static_cast<std::size_t>(-1)) return;
        DirectoryTiming dt = directory_summary(current_name, std::move(current_records),
                                               std::chrono::duration<double>(now - dir_start).count());
        if (callbacks.on_directory) callbacks.on_directory(dt);
        directories.push_back(std::move(dt));
        current_records.clear();
    };

    const auto handle_item = [&](detail::PipelineItem&& item) {
        if (item.dir_index != current_dir) {
            const auto now = std::chrono::steady_clock::now();
            finish_directory(now);
            current_dir = item.dir_index;
            current_name = item.directory_name;
            dir_start = now;
        }
        if (!item.decode_ok) {
            summary.warnings.push_back(item.warning);
            if (callbacks.on_warning) callbacks.on_warning(item.warning);
        } else {
            TimingRecord rec = time_invocation(backend, item.batch, run_epoch);
            rec.directory_name = item.directory_name;
            rec.ordinal_in_directory = current_records.size();
            current_records.push_back(std::move(rec));
        }
        const ProgressEvent ev = tracker.tick();
        if (callbacks.on_progress) callbacks.on_progress(ev);
    };

    if (cfg.prefetch) {
        detail::BoundedItemQueue queue(2);
        std::exception_ptr worker_error;
        std::thread worker([&] {
            try {
                for (std::size_t d = 0; d < manifest.directories.size(); ++d) {
                    const auto& dir = manifest.directories[d];
                    for (const auto& image : dir.images) {
                        if (!queue.push(detail::make_pipeline_item(d, dir, image, cfg.scales, cfg.window_spec))) {
                            return; // consumer aborted
                        }
                    }
                }
            } catch (...) {
                worker_error = std::current_exception();
            }
            queue.close();
        });
        try {
            while (auto item = queue.pop()) handle_item(std::move(*item));
        } catch (...) {
            queue.abort();
            worker.join();
            throw;
        }
        worker.join();
        if (worker_error) std::rethrow_exception(worker_error);
    } else {
        for (std::size_t d = 0; d < manifest.directories.size(); ++d) {
            const auto& dir = manifest.directories[d];
            for (const auto& image : dir.images) {
                handle_item(detail::make_pipeline_item(d, dir, image, cfg.scales, cfg.window_spec));
            }
        }
    }
    finish_directory(std::chrono::steady_clock::now());

    RunSummary pooled = summarize_run(std::move(directories));
    summary.directories = std::move(pooled.directories);
    summary.global_avg_model_seconds = pooled.global_avg_model_seconds;
    summary.total_images = pooled.total_images;
    summary.progress_events = tracker.events();
    return summary;
}

/// Convenience overload constructing the backend from the descriptor. The
/// dataset is checked first so an unusable dataset never spawns an external
/// backend process.
inline RunSummary run_benchmark(const RunConfig& cfg, const RunCallbacks& callbacks = {}) {
    (void)scan_dataset(cfg.dataset_root);
    const auto backend = make_backend(cfg.backend);
    return run_benchmark(cfg, *backend, callbacks);
}

} // namespace msbench
