#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "msbench/analysis.hpp"
#include "msbench/errors.hpp"
#include "msbench/harness.hpp"
#include "msbench/stats.hpp"

namespace msbench {

/// Fixed 9-decimal seconds (nanosecond granularity); round-trips are
/// lossless at clock resolution.
inline std::string format_seconds(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", seconds);
    return buf;
}

/// Output locations of one run.
struct RunArtifacts {
    fs::path summary_path;
    fs::path csv_path;
    fs::path plot_dir;

    static RunArtifacts in_dir(const fs::path& out_dir) {
        return {out_dir / "summary.txt", out_dir / "times.csv", out_dir / "plots"};
    }
};

/// One line per directory in run order, then the pooled TOTAL line:
///   <name>: total=<T>s avg_model=<A>s n=<count>
///   TOTAL: avg_model=<G>s n=<count>
/// Absent averages render as "n/a" (no unit).
inline std::string summary_directory_line(const DirectoryTiming& dir) {
    std::string line = dir.directory_name + ": total=" + format_seconds(dir.wall_seconds) + "s avg_model=";
    line += dir.avg_model_seconds ? format_seconds(*dir.avg_model_seconds) + "s" : "n/a";
    line += " n=" + std::to_string(dir.records.size());
    return line;
}

inline std::string summary_total_line(const RunSummary& summary) {
    std::string line = "TOTAL: avg_model=";
    line += summary.global_avg_model_seconds ? format_seconds(*summary.global_avg_model_seconds) + "s" : "n/a";
    line += " n=" + std::to_string(summary.total_images);
    return line;
}

inline void write_summary_text(const RunSummary& summary, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc); // binary: LF endings everywhere
    if (!out) throw ReportError("cannot open summary file: " + path.string());
    for (const auto& dir : summary.directories) {
        out << summary_directory_line(dir) << "\n";
    }
    out << summary_total_line(summary) << "\n";
    if (!out) throw ReportError("failed writing summary file: " + path.string());
}

/// One CSV row per directory: name, then every individual model time in
/// capture order (the excluded first included). No header row.
inline void write_times_csv(const RunSummary& summary, const fs::path& path) {
    if (summary.directories.empty()) throw ReportError("nothing to write: run produced no directories");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportError("cannot open times file: " + path.string());
    for (const auto& dir : summary.directories) {
        out << dir.directory_name;
        for (const auto& rec : dir.records) {
            out << "," << format_seconds(rec.model_seconds);
        }
        out << "\n";
    }
    if (!out) throw ReportError("failed writing times file: " + path.string());
}

/// Inverse of write_times_csv. A bare directory name is an empty trace.
inline std::vector<std::pair<std::string, std::vector<double>>> read_times_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open times file: " + path.string(), 0, 0);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (text.empty()) throw ParseError("empty times file: " + path.string(), 0, 0);

    std::vector<std::pair<std::string, std::vector<double>>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        const bool has_newline = eol != std::string::npos;
        if (!has_newline) eol = text.size();
        ++line_no;
        const std::string_view line(text.data() + pos, eol - pos);
        if (line.empty()) {
            if (has_newline && eol + 1 == text.size()) break; // trailing newline
            if (!has_newline) break;
            throw ParseError(path.string() + ": empty row at line " + std::to_string(line_no), line_no, 1);
        }

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        std::vector<std::size_t> field_cols;
        while (true) {
            const std::size_t comma = line.find(',', start);
            field_cols.push_back(start + 1);
            if (comma == std::string_view::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }

        if (fields.front().empty()) {
            throw ParseError(path.string() + ": missing directory name at line " + std::to_string(line_no),
                             line_no, 1);
        }
        std::pair<std::string, std::vector<double>> row{std::string(fields.front()), {}};
        for (std::size_t f = 1; f < fields.size(); ++f) {
            const auto field = fields[f];
            double value = 0.0;
            const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
            if (result.ec != std::errc{} || result.ptr != field.data() + field.size() || field.empty()) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ":" +
                                     std::to_string(field_cols[f]) + ": malformed numeric field '" +
                                     std::string(field) + "'",
                                 line_no, field_cols[f]);
            }
            row.second.push_back(value);
        }
        rows.push_back(std::move(row));
        pos = eol + 1;
    }
    return rows;
}

/// Flattens a run into a trace: every record in capture order, boundaries
/// where a new directory starts.
namespace detail {

inline void mark_directory_boundary(Trace& trace) {
    if (trace.samples.empty()) return;
    if (!trace.directory_boundaries.empty() && trace.directory_boundaries.back() == trace.samples.size()) return;
    trace.directory_boundaries.push_back(trace.samples.size());
}

} // namespace detail

inline Trace trace_from_summary(const RunSummary& summary, std::string label = {}) {
    Trace trace;
    trace.run_label = std::move(label);
    for (const auto& dir : summary.directories) {
        if (dir.records.empty()) continue;
        detail::mark_directory_boundary(trace);
        for (const auto& rec : dir.records) trace.samples.push_back(rec.model_seconds);
    }
    return trace;
}

/// Same flattening for rows read back from a times CSV.
inline Trace trace_from_rows(const std::vector<std::pair<std::string, std::vector<double>>>& rows,
                             std::string label = {}, bool exclude_first = false) {
    Trace trace;
    trace.run_label = std::move(label);
    for (const auto& [name, times] : rows) {
        (void)name;
        const std::size_t first = exclude_first ? 1 : 0;
        if (times.size() <= first) continue;
        detail::mark_directory_boundary(trace);
        for (std::size_t i = first; i < times.size(); ++i) trace.samples.push_back(times[i]);
    }
    return trace;
}

/// Sturges' rule bin count.
inline std::size_t sturges_bins(std::size_t n) {
    if (n <= 1) return 1;
    return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
}

/// Writes the plot-ready data files for a trace:
///   temporal.csv     ordinal,seconds            (capture-order line plot)
///   histogram.csv    bin_left,bin_right,count   (Sturges' rule bins)
///   percentiles.csv  p,seconds for p in 1..99   (percentile curve)
/// Content is deterministic for a given trace.
inline RunArtifacts emit_plot_data(const Trace& trace, const fs::path& plot_dir) {
    if (trace.samples.empty()) throw ReportError("nothing to plot: empty trace");
    std::error_code ec;
    fs::create_directories(plot_dir, ec);
    if (ec) throw ReportError("cannot create plot directory: " + plot_dir.string());

    const auto open = [](const fs::path& p) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw ReportError("cannot open plot file: " + p.string());
        return out;
    };

    {
        auto out = open(plot_dir / "temporal.csv");
        for (const auto& [ordinal, seconds] : temporal_series(trace)) {
            out << ordinal << "," << format_seconds(seconds) << "\n";
        }
        if (!out) throw ReportError("failed writing temporal.csv");
    }
    {
        auto out = open(plot_dir / "histogram.csv");
        const auto [min_it, max_it] = std::minmax_element(trace.samples.begin(), trace.samples.end());
        const double lo = *min_it, hi = *max_it;
        if (lo == hi) {
            out << format_seconds(lo) << "," << format_seconds(hi) << "," << trace.samples.size() << "\n";
        } else {
            const std::size_t bins = sturges_bins(trace.samples.size());
            const double width = (hi - lo) / static_cast<double>(bins);
            std::vector<std::size_t> counts(bins, 0);
            for (double v : trace.samples) {
                std::size_t b = static_cast<std::size_t>((v - lo) / width);
                if (b >= bins) b = bins - 1; // max lands in the last bin
                ++counts[b];
            }
            for (std::size_t b = 0; b < bins; ++b) {
                out << format_seconds(lo + width * static_cast<double>(b)) << ","
                    << format_seconds(lo + width * static_cast<double>(b + 1)) << "," << counts[b] << "\n";
            }
        }
        if (!out) throw ReportError("failed writing histogram.csv");
    }
    {
        auto out = open(plot_dir / "percentiles.csv");
        for (int p = 1; p <= 99; ++p) {
            out << p << "," << format_seconds(percentile(trace.samples, static_cast<double>(p))) << "\n";
        }
        if (!out) throw ReportError("failed writing percentiles.csv");
    }

    RunArtifacts artifacts;
    artifacts.plot_dir = plot_dir;
    return artifacts;
}

inline RunArtifacts emit_plot_data(const RunSummary& summary, const fs::path& plot_dir) {
    return emit_plot_data(trace_from_summary(summary), plot_dir);
}

} // namespace msbench
