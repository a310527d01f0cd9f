#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdcycles/bundled.hpp"
#include "mdcycles/config.hpp"
#include "mdcycles/ingest.hpp"
#include "mdcycles/pipeline.hpp"
#include "mdcycles/plot.hpp"
#include "mdcycles/report_json.hpp"

namespace mdcycles::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

/// Input path that selects the embedded 1976-05..2020-12 table.
inline constexpr std::string_view kBundledInput = "@bundled";

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("failed writing '" + path + "'");
}

inline std::string input_text(const std::string& path) {
    if (path == kBundledInput) return std::string(bundled::counts_csv);
    return read_file(path);
}

inline MonthlySeries load_column(const std::string& path, const std::string& column) {
    std::istringstream in(input_text(path));
    return load_series_column(in, column);
}

inline IniConfig load_config(const std::optional<std::string>& path) {
    return IniConfig::parse(path ? read_file(*path) : std::string(bundled::reproduce_config));
}

inline std::string report_text(const CycleReport& r) { return to_json(r).dump(2) + "\n"; }

inline std::string decomposition_text(const Decomposition& d) {
    std::ostringstream out;
    write_decomposition_csv(out, d);
    return out.str();
}

/// Peak/selection flags that override config values when given.
struct Overrides {
    std::optional<int> period;
    bool no_seasonal = false;
    std::optional<std::string> filter;
    std::optional<int> lag;
    std::optional<int> nups, ndowns, minpeakdistance, npeaks;
    std::optional<double> minpeakheight, threshold;
    bool sort_desc = false;
    std::optional<std::string> mode, window1, window2, indices;
    bool force = false;

    void register_on(CLI::App& app) {
        app.add_option("--period", period, "Seasonal period in months");
        app.add_flag("--no-seasonal", no_seasonal, "Skip seasonal adjustment");
        app.add_option("--filter", filter, "Trend filter: refined|centered");
        app.add_option("--lag", lag, "Fixed refined-filter lag (default: selected from data)");
        app.add_option("--nups", nups, "Minimum ascending steps before a peak");
        app.add_option("--ndowns", ndowns, "Minimum descending steps after a peak");
        app.add_option("--minpeakheight", minpeakheight, "Minimum peak height");
        app.add_option("--threshold", threshold, "Minimum rise above the pattern ends");
        app.add_option("--minpeakdistance", minpeakdistance, "Minimum spacing between peaks");
        app.add_option("--npeaks", npeaks, "Keep at most this many peaks (0 = all)");
        app.add_flag("--sort-desc", sort_desc, "Order peaks by decreasing height");
        app.add_option("--mode", mode, "Peak selection: auto_first_two|window_max|explicit_indices");
        app.add_option("--window1", window1, "First peak window YYYY-MM..YYYY-MM");
        app.add_option("--window2", window2, "Second peak window YYYY-MM..YYYY-MM");
        app.add_option("--indices", indices, "Explicit peak indices i1,i2 (1-based)");
        app.add_flag("--force", force, "Accept explicit indices that are not detected peaks");
    }

    void apply(AnalysisConfig& c) const {
        if (period) c.decompose.period = *period;
        if (no_seasonal) c.decompose.seasonal = false;
        if (filter) c.decompose.filter = parse_trend_filter(*filter);
        if (lag) c.decompose.lag = *lag;
        if (nups) c.peaks.nups = *nups;
        if (ndowns) c.peaks.ndowns = *ndowns;
        if (minpeakdistance) c.peaks.minpeakdistance = *minpeakdistance;
        if (npeaks) c.peaks.npeaks = *npeaks;
        if (minpeakheight) c.peaks.minpeakheight = *minpeakheight;
        if (threshold) c.peaks.threshold = *threshold;
        if (sort_desc) c.peaks.sort_desc = true;
        if (mode) {
            c.selection = SelectionStrategy{};
            c.selection.mode = parse_selection_mode(*mode);
        }
        if (window1 || window2) {
            if (!window1 || !window2) throw ConfigError("--window1 and --window2 go together");
            c.selection.windows = std::pair{parse_window(*window1), parse_window(*window2)};
        }
        if (indices) {
            IniConfig one;
            one.set("selection.indices", *indices);
            c.selection.explicit_indices = apply_config(one, c).selection.explicit_indices;
        }
        if (force) c.selection.force = true;
    }
};

inline std::vector<std::string> reproduce_columns(const IniConfig& ini) {
    auto cols = ini.get("reproduce.columns");
    if (!cols) throw ConfigError("config lacks [reproduce] columns");
    auto list = mdcycles::detail::split_list(*cols);
    if (list.empty()) throw ConfigError("[reproduce] columns is empty");
    return list;
}

inline AnalysisConfig resolve(const IniConfig& cfg, const std::string& input, const std::string& column,
                              const Overrides* overrides = nullptr) {
    AnalysisConfig base;
    base.input_path = input;
    base.column = column;
    auto resolved = apply_config(cfg, base);
    resolved.input_path = input;
    if (overrides) overrides->apply(resolved);
    validate(resolved);
    return resolved;
}

inline void print_warnings(std::ostream& err, const CycleReport& r) {
    for (const auto& w : r.warnings) err << "warning: " << r.label << ": " << w << '\n';
}

inline int cmd_ingest(const std::vector<std::string>& pmn, const std::vector<std::string>& pma,
                      const std::string& date_field, const std::string& start_text,
                      const std::optional<std::string>& end_text, const std::string& out_path,
                      const std::optional<std::string>& from_counts, std::ostream& out, std::ostream& err) {
    if (from_counts) {
        auto table = load_counts_table(input_text(*from_counts));
        std::ostringstream csv;
        write_counts_csv(csv, table);
        write_file(out_path, csv.str());
        out << "counts: " << table.rows() << " months " << table.start().str() << ".."
            << table.columns().front().end().str() << " -> " << out_path << '\n';
        return kOk;
    }
    if (pmn.empty() && pma.empty()) {
        err << "ingest: at least one --pmn or --pma file is required\n";
        return kUsageError;
    }

    std::vector<FdaRecord> pmn_records, pma_records;
    auto load = [&](const std::vector<std::string>& files, RecordKind kind, std::vector<FdaRecord>& into) {
        for (const auto& f : files) {
            auto parsed = parse_fda_file(read_file(f), kind);
            const auto& d = parsed.diagnostics;
            out << to_string(kind) << ' ' << f << ": read=" << d.rows_read << " kept=" << d.kept
                << " rejected=" << d.rejected << " unparseable_dates=" << d.unparseable_dates << " formats=";
            bool first = true;
            for (const auto& fmt : d.date_formats) {
                out << (first ? "" : ";") << fmt;
                first = false;
            }
            if (first) out << '-';
            out << " duplicate_ids=" << d.duplicate_ids.size() << '\n';
            into.insert(into.end(), std::make_move_iterator(parsed.records.begin()),
                        std::make_move_iterator(parsed.records.end()));
        }
    };
    load(pmn, RecordKind::PMN, pmn_records);
    load(pma, RecordKind::PMA, pma_records);

    const bool want_received = date_field != "decision";
    const bool want_decision = date_field != "received";
    const auto start = YearMonth::parse(start_text);
    YearMonth end = start;
    if (end_text) {
        end = YearMonth::parse(*end_text);
    } else {
        bool any = false;
        for (const auto* recs : {&pmn_records, &pma_records}) {
            for (const auto& r : *recs) {
                for (const auto& d : {r.date_received, r.decision_date}) {
                    if (!d) continue;
                    end = any ? std::max(end, d->year_month()) : d->year_month();
                    any = true;
                }
            }
        }
        if (!any) throw Error("no dated records to count");
        if (end < start) throw RangeError("latest record month " + end.str() + " precedes --start " + start.str());
    }

    auto count = [&](const std::vector<FdaRecord>& recs, DateField field, const char* label) {
        auto c = count_monthly(recs, field, start, end, label);
        out << label << ": counted=" << recs.size() - c.out_of_range - c.missing_date << " out_of_range=" << c.out_of_range
            << " missing_date=" << c.missing_date << '\n';
        return c.series;
    };

    std::vector<MonthlySeries> columns;
    std::optional<MonthlySeries> pmn_r, pmn_c, pma_r, pma_a;
    if (want_received) {
        pmn_r = count(pmn_records, DateField::Received, "X510kr");
        pma_r = count(pma_records, DateField::Received, "PMAr");
    }
    if (want_decision) {
        pmn_c = count(pmn_records, DateField::Decision, "X510kc");
        pma_a = count(pma_records, DateField::Decision, "PMAa");
    }
    if (want_received && want_decision) {
        auto table = CountsTable::from_parts(*pmn_r, *pmn_c, *pma_r, *pma_a);
        columns = table.columns();
    } else if (want_received) {
        columns = {*pmn_r, *pma_r, composite(*pmn_r, *pma_r).relabeled("X510krPMAr")};
    } else {
        columns = {*pmn_c, *pma_a, composite(*pmn_c, *pma_a).relabeled("X510kcPMAa")};
    }
    std::ostringstream csv;
    write_counts_csv(csv, std::span<const MonthlySeries>(columns));
    write_file(out_path, csv.str());
    out << "counts: " << columns.front().size() << " months " << start.str() << ".." << end.str() << " -> " << out_path
        << '\n';
    return kOk;
}

inline int cmd_analyze(const std::string& input, const std::string& column, const std::optional<std::string>& config,
                       const Overrides& overrides, const std::optional<std::string>& report_path,
                       const std::optional<std::string>& decomp_path, std::ostream& out, std::ostream& err) {
    auto cfg = resolve(load_config(config), input, column, &overrides);
    if (report_path) cfg.report_path = *report_path;
    if (decomp_path) cfg.decomp_path = *decomp_path;

    auto series = load_column(cfg.input_path, cfg.column);
    auto result = run_analysis(series, cfg);
    if (!cfg.report_path.empty()) write_file(cfg.report_path, report_text(result.report));
    if (!cfg.decomp_path.empty()) write_file(cfg.decomp_path, decomposition_text(result.decomposition));
    print_warnings(err, result.report);
    out << summary_line(result.report) << '\n';
    return kOk;
}

inline std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

inline int cmd_plot(const std::vector<std::string>& decomps, const std::vector<std::string>& reports,
                    const std::vector<std::string>& colors, const std::string& out_path, const std::string& title,
                    int width, int height, std::ostream& out) {
    static const std::vector<std::string> palette{"red", "blue", "green", "black", "orange", "purple"};
    auto color_of = [&](std::size_t k) {
        if (k < colors.size()) return colors[k];
        return palette[k % palette.size()];
    };

    FigureSpec spec;
    spec.width = width;
    spec.height = height;
    spec.title = title;
    std::vector<std::string> names(decomps.size());
    for (std::size_t k = 0; k < reports.size(); ++k) {
        auto markers = markers_from_json(nlohmann::json::parse(read_file(reports[k]), nullptr, true));
        if (k < names.size()) names[k] = markers.label;
        for (const auto& m : markers.markers) spec.markers.push_back({m, color_of(k)});
    }
    for (std::size_t k = 0; k < decomps.size(); ++k) {
        std::istringstream in(read_file(decomps[k]));
        auto trend = load_series_column(in, "trend");
        const auto name = names[k].empty() ? stem(decomps[k]) : names[k];
        spec.traces.push_back({trend.relabeled(name), color_of(k), name});
    }
    write_file(out_path, render_svg(spec));
    out << "plot: " << spec.traces.size() << " trend(s), " << spec.markers.size() << " marker(s) -> " << out_path << '\n';
    return kOk;
}

inline int cmd_reproduce(const std::string& out_dir, const std::optional<std::string>& config, const std::string& input,
                         std::ostream& out, std::ostream& err) {
    const auto ini = load_config(config);
    const auto columns = reproduce_columns(ini);
    std::filesystem::create_directories(out_dir);

    std::vector<AnalysisConfig> configs;
    for (const auto& c : columns) configs.push_back(resolve(ini, input, c));

    std::vector<std::future<AnalysisResult>> jobs;
    for (const auto& cfg : configs) {
        jobs.push_back(std::async(std::launch::async, [cfg] { return run_analysis(load_column(cfg.input_path, cfg.column), cfg); }));
    }
    std::vector<AnalysisResult> results;
    for (auto& j : jobs) results.push_back(j.get());

    FigureSpec spec;
    spec.title = "Composite trends: peaks and troughs";
    namespace fs = std::filesystem;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        const auto& cfg = configs[k];
        write_file((fs::path(out_dir) / (cfg.column + ".report.json")).string(), report_text(r.report));
        write_file((fs::path(out_dir) / (cfg.column + ".decomp.csv")).string(), decomposition_text(r.decomposition));
        spec.traces.push_back({r.decomposition.trend.relabeled(cfg.column), cfg.color, cfg.column});
        for (const auto& m : {r.report.peak1, r.report.trough, r.report.peak2}) spec.markers.push_back({m, cfg.color});
        print_warnings(err, r.report);
        out << summary_line(r.report) << '\n';
    }
    write_file((fs::path(out_dir) / "figure2.svg").string(), render_svg(spec));
    out << "wrote " << results.size() << " report(s), decompositions and figure2.svg to " << out_dir << '\n';
    return kOk;
}

} // namespace detail

/// Runs `mdcycles <subcommand> ...`; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Monthly FDA device-record cycle analysis"};
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "Count FDA PMN/PMA records per month");
    std::vector<std::string> pmn, pma;
    std::string date_field = "both", start = kDefaultStart.str(), ingest_out;
    std::optional<std::string> end, from_counts;
    ingest->add_option("--pmn", pmn, "510(k) download file(s)");
    ingest->add_option("--pma", pma, "PMA download file(s)");
    ingest->add_option("--date-field", date_field, "received|decision|both")
        ->check(CLI::IsMember({"received", "decision", "both"}));
    ingest->add_option("--start", start, "First month YYYY-MM");
    ingest->add_option("--end", end, "Last month YYYY-MM (default: latest record)");
    ingest->add_option("--from-counts", from_counts, "Re-emit an existing counts table ('@bundled' for the bundled one)");
    ingest->add_option("--out", ingest_out, "Counts CSV to write")->required();

    auto* analyze_cmd = app.add_subcommand("analyze", "Decompose one column and report its cycle");
    std::string input, column;
    std::optional<std::string> config, report, decomp;
    detail::Overrides overrides;
    analyze_cmd->add_option("--input", input, "Counts CSV ('@bundled' for the bundled table)")->required();
    analyze_cmd->add_option("--column", column, "Column label")->required();
    analyze_cmd->add_option("--config", config, "INI config (default: built-in reproduction config)");
    analyze_cmd->add_option("--report", report, "Cycle report JSON to write");
    analyze_cmd->add_option("--decomp", decomp, "Decomposition CSV to write");
    overrides.register_on(*analyze_cmd);

    auto* plot = app.add_subcommand("plot", "Draw trends with peak/trough rules as SVG");
    std::vector<std::string> plot_decomps, plot_reports, plot_colors;
    std::string plot_out, plot_title;
    int width = 960, height = 540;
    plot->add_option("--decomp", plot_decomps, "Decomposition CSV(s), comma separated")->required()->delimiter(',');
    plot->add_option("--report", plot_reports, "Cycle report JSON(s), comma separated")->delimiter(',');
    plot->add_option("--colors", plot_colors, "Colors per series, comma separated")->delimiter(',');
    plot->add_option("--title", plot_title, "Figure title");
    plot->add_option("--width", width, "Canvas width in pixels");
    plot->add_option("--height", height, "Canvas height in pixels");
    plot->add_option("--out", plot_out, "SVG file to write")->required();

    auto* repro = app.add_subcommand("reproduce-paper", "Run the bundled two-composite analysis end to end");
    std::string out_dir, repro_input{kBundledInput};
    std::optional<std::string> repro_config;
    repro->add_option("--out-dir", out_dir, "Output directory")->required();
    repro->add_option("--config", repro_config, "INI config (default: built-in reproduction config)");
    repro->add_option("--input", repro_input, "Counts CSV (default: bundled table)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (*ingest) {
            return detail::cmd_ingest(pmn, pma, date_field, start, end, ingest_out, from_counts, out, err);
        }
        if (*analyze_cmd) {
            return detail::cmd_analyze(input, column, config, overrides, report, decomp, out, err);
        }
        if (*plot) {
            return detail::cmd_plot(plot_decomps, plot_reports, plot_colors, plot_out, plot_title, width, height, out);
        }
        if (*repro) return detail::cmd_reproduce(out_dir, repro_config, repro_input, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const InsufficiencyError& e) {
        err << "error: " << e.what() << "\ncandidates:\n" << e.candidates();
        return kDataError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

} // namespace mdcycles::cli
