#pragma once

#include <charconv>
#include <limits>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdcycles/cycle.hpp"
#include "mdcycles/decompose.hpp"
#include "mdcycles/error.hpp"
#include "mdcycles/ingest.hpp"
#include "mdcycles/peaks.hpp"

namespace mdcycles {

/// Flat INI text: `[section]` headers, `key = value` lines, `#`/`;` comments.
/// Keys are stored as "section.key". A section may be qualified with a column
/// label (`[X510kcPMAa.peaks]`) to apply to that column only.
class IniConfig {
public:
    IniConfig() = default;

    static IniConfig parse(std::istream& in) {
        IniConfig cfg;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto text = detail::trim(line);
            if (text.empty() || text.front() == '#' || text.front() == ';') continue;
            if (text.front() == '[') {
                if (text.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
                section = std::string(detail::trim(text.substr(1, text.size() - 2)));
                continue;
            }
            auto eq = text.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            }
            auto key = std::string(detail::trim(text.substr(0, eq)));
            auto value = std::string(detail::trim(text.substr(eq + 1)));
            if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    static IniConfig parse(std::string_view text) {
        std::istringstream in{std::string(text)};
        return parse(in);
    }

    std::optional<std::string> get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    /// Column-qualified value first, then the unqualified one.
    std::optional<std::string> lookup(const std::string& column, const std::string& key) const {
        if (auto v = get(column + "." + key)) return v;
        return get(key);
    }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct AnalysisConfig {
    std::string input_path;
    std::string column;
    DecomposeOptions decompose;
    PeakOptions peaks;
    SelectionStrategy selection;
    std::string color = "black";
    std::string report_path;
    std::string decomp_path;
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
    std::vector<std::string> out;
    for (auto part : split(s, sep)) {
        auto t = trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + std::string(v) + "'");
}

inline int parse_int(const std::string& key, std::string_view v) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(key + ": expected an integer, got '" + std::string(v) + "'");
    }
    return out;
}

inline double parse_real(const std::string& key, std::string_view v) {
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(key + ": expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

} // namespace detail

/// "YYYY-MM..YYYY-MM"
inline MonthWindow parse_window(std::string_view text) {
    auto sep = text.find("..");
    if (sep == std::string_view::npos) throw ConfigError("window '" + std::string(text) + "' must be FROM..TO");
    try {
        return {YearMonth::parse(detail::trim(text.substr(0, sep))), YearMonth::parse(detail::trim(text.substr(sep + 2)))};
    } catch (const ParseError& e) {
        throw ConfigError(std::string("window: ") + e.what());
    }
}

inline TrendFilter parse_trend_filter(std::string_view s) {
    if (s == "refined") return TrendFilter::Refined;
    if (s == "centered") return TrendFilter::Centered;
    throw ConfigError("unknown trend filter '" + std::string(s) + "'");
}

/// Applies the keys of `cfg` relevant to `column` on top of `base`.
inline AnalysisConfig apply_config(const IniConfig& cfg, AnalysisConfig base) {
    const auto& col = base.column;
    auto get = [&](const std::string& key) { return cfg.lookup(col, key); };

    if (auto v = get("input.path")) base.input_path = *v;
    if (auto v = get("decompose.period")) base.decompose.period = detail::parse_int("decompose.period", *v);
    if (auto v = get("decompose.seasonal")) base.decompose.seasonal = detail::parse_bool("decompose.seasonal", *v);
    if (auto v = get("decompose.filter")) base.decompose.filter = parse_trend_filter(*v);
    if (auto v = get("decompose.lag")) {
        if (*v == "auto") base.decompose.lag.reset();
        else base.decompose.lag = detail::parse_int("decompose.lag", *v);
    }

    if (auto v = get("peaks.nups")) base.peaks.nups = detail::parse_int("peaks.nups", *v);
    if (auto v = get("peaks.ndowns")) base.peaks.ndowns = detail::parse_int("peaks.ndowns", *v);
    if (auto v = get("peaks.minpeakheight")) base.peaks.minpeakheight = detail::parse_real("peaks.minpeakheight", *v);
    if (auto v = get("peaks.threshold")) base.peaks.threshold = detail::parse_real("peaks.threshold", *v);
    if (auto v = get("peaks.minpeakdistance"))
        base.peaks.minpeakdistance = detail::parse_int("peaks.minpeakdistance", *v);
    if (auto v = get("peaks.npeaks")) base.peaks.npeaks = detail::parse_int("peaks.npeaks", *v);
    if (auto v = get("peaks.sort_desc")) base.peaks.sort_desc = detail::parse_bool("peaks.sort_desc", *v);

    if (auto v = get("selection.mode")) {
        base.selection.mode = parse_selection_mode(*v);
        base.selection.windows.reset();
        base.selection.explicit_indices.reset();
    }
    auto w1 = get("selection.window1"), w2 = get("selection.window2");
    if (w1 || w2) {
        if (!w1 || !w2) throw ConfigError("selection needs both window1 and window2");
        base.selection.windows = std::pair{parse_window(*w1), parse_window(*w2)};
    }
    if (auto v = get("selection.indices")) {
        auto parts = detail::split_list(*v);
        if (parts.size() != 2) throw ConfigError("selection.indices needs two comma-separated indices");
        const int a = detail::parse_int("selection.indices", parts[0]);
        const int b = detail::parse_int("selection.indices", parts[1]);
        if (a < 1 || b < 1) throw ConfigError("selection.indices must be positive");
        base.selection.explicit_indices = std::pair{static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    }
    if (auto v = get("selection.force")) base.selection.force = detail::parse_bool("selection.force", *v);

    if (auto v = get("plot.color")) base.color = *v;
    if (auto v = get("output.report")) base.report_path = *v;
    if (auto v = get("output.decomp")) base.decomp_path = *v;
    return base;
}

/// Raises ConfigError unless the configuration can run.
inline void validate(const AnalysisConfig& c) {
    if (c.input_path.empty()) throw ConfigError("no input path");
    if (c.column.empty()) throw ConfigError("no column");
    if (c.decompose.period < 2) throw ConfigError("decompose.period must be >= 2");
    if (c.decompose.lag && *c.decompose.lag < 0) throw ConfigError("decompose.lag must be >= 0");
    try {
        c.peaks.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("peaks: ") + e.what());
    }
    c.selection.validate();
}

} // namespace mdcycles
