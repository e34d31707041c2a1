// msbench: latency benchmark for windowed multi-scale image inference.
//
// Subcommands:
//   run          walk a category-directory dataset, time one backend
//                invocation per image, write summary/CSV/plot data
//   analyze      statistics, regime detection and run classification for a
//                recorded times CSV
//   compare      percentile-curve comparison of two sets of recorded runs
//   gen-dataset  write a deterministic synthetic dataset

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "msbench/msbench.hpp"

namespace {

namespace fs = std::filesystem;

std::vector<double> parse_scales(const std::string& text) {
    std::vector<double> factors;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string field = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            const double v = std::stod(field, &used);
            if (used != field.size() || !(v > 0.0)) throw std::invalid_argument(field);
            factors.push_back(v);
        } catch (const std::exception&) {
            throw msbench::ArgumentError("unparsable scale list entry '" + field + "'");
        }
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    if (factors.empty()) throw msbench::ArgumentError("scale list is empty");
    return factors;
}

struct RunOptions {
    std::string dataset;
    std::string scales = "0.70710678,1.0,1.41421356";
    int window = 224;
    int stride = 112;
    std::string backend = "reference";
    std::uint64_t seed = 0;
    int classes = 23;
    double synthetic_fast = 0.007;
    double synthetic_slow = 0.009;
    double synthetic_jitter = 0.0002;
    double synthetic_fast_dwell = 50.0;
    double synthetic_slow_dwell = 50.0;
    std::string synthetic_start = "fast";
    std::string out_dir = "msbench_out";
    std::string progress = "auto";
    bool no_prefetch = false;
};

msbench::BackendDescriptor make_descriptor(const RunOptions& opt) {
    msbench::BackendDescriptor desc;
    desc.class_count = opt.classes;
    if (opt.backend == "reference") {
        desc.kind = msbench::BackendDescriptor::Kind::reference;
        desc.reference_seed = opt.seed;
    } else if (opt.backend == "synthetic") {
        desc.kind = msbench::BackendDescriptor::Kind::synthetic;
        desc.latency.fast_mean = opt.synthetic_fast;
        desc.latency.slow_mean = opt.synthetic_slow;
        desc.latency.jitter_sd = opt.synthetic_jitter;
        desc.latency.fast_dwell_mean = opt.synthetic_fast_dwell;
        desc.latency.slow_dwell_mean = opt.synthetic_slow_dwell;
        desc.latency.start_slow = opt.synthetic_start == "slow";
        desc.latency.seed = opt.seed;
    } else if (opt.backend.rfind("external:", 0) == 0) {
        desc.kind = msbench::BackendDescriptor::Kind::external;
        desc.external_command = opt.backend.substr(9);
        if (desc.external_command.empty()) throw msbench::ArgumentError("external backend command is empty");
    } else {
        throw msbench::ArgumentError("unknown backend '" + opt.backend +
                                     "' (expected reference, synthetic, or external:<command>)");
    }
    return desc;
}

int cmd_run(const RunOptions& opt) {
    msbench::RunConfig cfg;
    cfg.dataset_root = opt.dataset;
    cfg.scales.factors = parse_scales(opt.scales);
    cfg.window_spec.window = opt.window;
    cfg.window_spec.stride = opt.stride;
    cfg.backend = make_descriptor(opt);
    cfg.out_dir = opt.out_dir;
    cfg.prefetch = !opt.no_prefetch;
    if (opt.progress == "auto") {
        cfg.progress = ::isatty(STDOUT_FILENO) != 0;
    } else if (opt.progress == "on") {
        cfg.progress = true;
    } else if (opt.progress == "off") {
        cfg.progress = false;
    } else {
        throw msbench::ArgumentError("progress must be auto, on, or off");
    }

    std::cout << "run configuration:\n" << cfg.describe();

    msbench::RunCallbacks callbacks;
    bool bar_active = false;
    callbacks.on_progress = [&](const msbench::ProgressEvent& ev) {
        if (!cfg.progress) return;
        std::cerr << "\r" << msbench::render_progress(ev) << std::flush;
        bar_active = true;
    };
    callbacks.on_warning = [&](const std::string& w) {
        if (bar_active) {
            std::cerr << "\n";
            bar_active = false;
        }
        std::cerr << "warning: " << w << "\n";
    };
    callbacks.on_directory = [&](const msbench::DirectoryTiming& dir) {
        if (bar_active) {
            std::cerr << "\r" << std::string(100, ' ') << "\r" << std::flush;
        }
        std::cout << msbench::summary_directory_line(dir) << "\n";
    };

    const msbench::RunSummary summary = msbench::run_benchmark(cfg, callbacks);
    if (bar_active) std::cerr << "\n";
    std::cout << msbench::summary_total_line(summary) << "\n";

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw msbench::ReportError("cannot create output directory: " + cfg.out_dir.string());
    const auto artifacts = msbench::RunArtifacts::in_dir(cfg.out_dir);
    msbench::write_summary_text(summary, artifacts.summary_path);
    msbench::write_times_csv(summary, artifacts.csv_path);
    msbench::emit_plot_data(summary, artifacts.plot_dir);
    std::cout << "artifacts written to " << cfg.out_dir.string() << "\n";
    return 0;
}

void print_stat_line(const std::string& label, const msbench::StatSummary& s) {
    std::cout << label << ": n=" << s.n << " mean=" << msbench::format_seconds(s.mean)
              << " median=" << msbench::format_seconds(s.median) << " p5=" << msbench::format_seconds(s.p5)
              << " p95=" << msbench::format_seconds(s.p95) << " min=" << msbench::format_seconds(s.min)
              << " max=" << msbench::format_seconds(s.max) << " stddev=" << msbench::format_seconds(s.stddev)
              << "\n";
}

void print_regime_line(const std::string& label, const msbench::RegimeAnalysis& r) {
    std::cout << label << " regimes: " << (r.bimodal ? "bimodal" : "unimodal")
              << " fast=" << msbench::format_seconds(r.fast_mean) << " slow=" << msbench::format_seconds(r.slow_mean)
              << " slow_occupancy=";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", r.slow_occupancy);
    std::cout << buf << " ratio=";
    std::snprintf(buf, sizeof(buf), "%.4f", r.separation_ratio);
    std::cout << buf << " class=" << msbench::run_class_name(msbench::classify_run(r)) << "\n";
}

struct AnalyzeOptions {
    std::string csv;
    double ratio_threshold = 1.15;
    double min_fraction = 0.02;
    double occupancy_threshold = 0.5;
    bool exclude_first = false;
    std::string plot_dir;
};

int cmd_analyze(const AnalyzeOptions& opt) {
    const auto rows = msbench::read_times_csv(opt.csv);
    msbench::RegimeConfig rc;
    rc.ratio_threshold = opt.ratio_threshold;
    rc.min_fraction = opt.min_fraction;

    for (const auto& [name, times] : rows) {
        std::vector<double> samples(times.begin() + (opt.exclude_first && !times.empty() ? 1 : 0), times.end());
        if (samples.empty()) {
            std::cout << "directory " << name << ": n=0 (skipped)\n";
            continue;
        }
        print_stat_line("directory " + name, msbench::summarize(samples));
        msbench::Trace t{name, samples, {}};
        const auto regimes = msbench::detect_regimes(t, rc);
        std::cout << "directory " << name << " regimes: " << (regimes.bimodal ? "bimodal" : "unimodal")
                  << " class=" << msbench::run_class_name(msbench::classify_run(regimes, opt.occupancy_threshold))
                  << "\n";
    }

    const msbench::Trace pooled = msbench::trace_from_rows(rows, "pooled", opt.exclude_first);
    if (pooled.samples.empty()) throw msbench::ArgumentError("no samples to analyze in " + opt.csv);
    print_stat_line("pooled", msbench::summarize(pooled.samples));
    const auto regimes = msbench::detect_regimes(pooled, rc);
    print_regime_line("pooled", regimes);

    if (!opt.plot_dir.empty()) {
        msbench::emit_plot_data(pooled, opt.plot_dir);
        std::cout << "plot data written to " << opt.plot_dir << "\n";
    }
    return 0;
}

struct CompareOptions {
    std::vector<std::string> a_files;
    std::vector<std::string> b_files;
    std::string label_a = "A";
    std::string label_b = "B";
    bool exclude_first = false;
};

int cmd_compare(const CompareOptions& opt) {
    const auto load = [&](const std::vector<std::string>& files) {
        std::vector<msbench::Trace> traces;
        for (const auto& f : files) {
            const auto rows = msbench::read_times_csv(f);
            auto trace = msbench::trace_from_rows(rows, fs::path(f).stem().string(), opt.exclude_first);
            if (trace.samples.empty()) throw msbench::ArgumentError("no samples in " + f);
            traces.push_back(std::move(trace));
        }
        return traces;
    };
    const auto report = msbench::compare_runs(load(opt.a_files), load(opt.b_files),
                                              msbench::default_percentile_grid(), opt.label_a, opt.label_b);

    for (const auto& h : report.headline) {
        std::cout << h.metric << ": " << report.label_a << "=" << msbench::format_seconds(h.a) << " "
                  << report.label_b << "=" << msbench::format_seconds(h.b) << " leader="
                  << (h.leader == 'A' ? report.label_a : (h.leader == 'B' ? report.label_b : "tie")) << "\n";
    }
    if (report.crossover_percentiles.empty()) {
        std::cout << "crossovers: none\n";
    } else {
        std::cout << "crossovers:";
        for (double p : report.crossover_percentiles) std::cout << " p" << static_cast<int>(p);
        std::cout << "\n";
    }
    std::cout << "percentile," << report.label_a << "," << report.label_b << "\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        std::cout << static_cast<int>(report.grid[i]) << "," << msbench::format_seconds(report.curve_a[i]) << ","
                  << msbench::format_seconds(report.curve_b[i]) << "\n";
    }
    return 0;
}

struct GenOptions {
    std::string out;
    std::size_t categories = 23;
    std::size_t per_category = 10;
    int width = 362;
    int height = 362;
    std::uint64_t seed = 0;
};

int cmd_gen(const GenOptions& opt) {
    msbench::SyntheticDatasetSpec spec;
    spec.categories = opt.categories;
    spec.images_per_category = opt.per_category;
    spec.width = opt.width;
    spec.height = opt.height;
    const auto manifest = msbench::gen_synthetic_dataset(spec, opt.seed, opt.out);
    std::cout << "wrote " << manifest.total_images << " images in " << manifest.directories.size()
              << " directories under " << opt.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inference latency benchmark for windowed multi-scale image workloads"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Execute a benchmark run over a dataset");
    run->add_option("--dataset", run_opt.dataset, "Dataset root (category subdirectories of images)")->required();
    run->add_option("--scales", run_opt.scales, "Comma-separated positive scale factors");
    run->add_option("--window", run_opt.window, "Window side length in pixels");
    run->add_option("--stride", run_opt.stride, "Window stride in pixels");
    run->add_option("--backend", run_opt.backend, "reference | synthetic | external:<command>");
    run->add_option("--seed", run_opt.seed, "Seed for reference weights / synthetic latency");
    run->add_option("--classes", run_opt.classes, "Expected class count for synthetic/external backends");
    run->add_option("--synthetic-fast", run_opt.synthetic_fast, "Synthetic fast-state mean seconds");
    run->add_option("--synthetic-slow", run_opt.synthetic_slow, "Synthetic slow-state mean seconds");
    run->add_option("--synthetic-jitter", run_opt.synthetic_jitter, "Synthetic jitter stddev seconds");
    run->add_option("--synthetic-fast-dwell", run_opt.synthetic_fast_dwell,
                    "Mean calls spent in the fast state (0 = never leave)");
    run->add_option("--synthetic-slow-dwell", run_opt.synthetic_slow_dwell,
                    "Mean calls spent in the slow state (0 = never leave)");
    run->add_option("--synthetic-start", run_opt.synthetic_start, "Initial synthetic state: fast | slow");
    run->add_option("--out-dir", run_opt.out_dir, "Directory for summary.txt, times.csv, plots/");
    run->add_option("--progress", run_opt.progress, "Progress bar: auto | on | off");
    run->add_flag("--no-prefetch", run_opt.no_prefetch, "Disable decode prefetching");

    AnalyzeOptions an_opt;
    auto* analyze = app.add_subcommand("analyze", "Analyze a recorded times CSV");
    analyze->add_option("csv", an_opt.csv, "times.csv produced by run")->required();
    analyze->add_option("--ratio-threshold", an_opt.ratio_threshold, "Bimodality slow/fast mean ratio threshold");
    analyze->add_option("--min-fraction", an_opt.min_fraction, "Minimum occupancy of each regime");
    analyze->add_option("--occupancy-threshold", an_opt.occupancy_threshold,
                        "Slow occupancy above which a run is low_performance");
    analyze->add_flag("--exclude-first", an_opt.exclude_first, "Drop the first time of each directory");
    analyze->add_option("--plot-dir", an_opt.plot_dir, "Also write plot data for the pooled trace");

    CompareOptions cmp_opt;
    auto* compare = app.add_subcommand("compare", "Compare two sets of recorded runs");
    compare->add_option("a_files", cmp_opt.a_files, "times CSVs of side A")->required()->expected(-1);
    compare->add_option("--against", cmp_opt.b_files, "times CSVs of side B")->required()->expected(-1);
    compare->add_option("--label-a", cmp_opt.label_a, "Display label for side A");
    compare->add_option("--label-b", cmp_opt.label_b, "Display label for side B");
    compare->add_flag("--exclude-first", cmp_opt.exclude_first, "Drop the first time of each directory");

    GenOptions gen_opt;
    auto* gen = app.add_subcommand("gen-dataset", "Write a deterministic synthetic dataset");
    gen->add_option("--out", gen_opt.out, "Output root directory")->required();
    gen->add_option("--categories", gen_opt.categories, "Number of category directories");
    gen->add_option("--per-category", gen_opt.per_category, "Images per category");
    gen->add_option("--width", gen_opt.width, "Image width in pixels");
    gen->add_option("--height", gen_opt.height, "Image height in pixels");
    gen->add_option("--seed", gen_opt.seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << " (try --help)\n";
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (analyze->parsed()) return cmd_analyze(an_opt);
        if (compare->parsed()) return cmd_compare(cmp_opt);
        if (gen->parsed()) return cmd_gen(gen_opt);
        std::cerr << "usage error: no subcommand (try --help)\n";
        return 1;
    } catch (const msbench::ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << " (try --help)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
