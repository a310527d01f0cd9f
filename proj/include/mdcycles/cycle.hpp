#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdcycles/error.hpp"
#include "mdcycles/peaks.hpp"
#include "mdcycles/series.hpp"

namespace mdcycles {

struct Marker {
    YearMonth date;
    std::size_t index = 0; ///< 1-based
    double amplitude = 0.0;
};

inline Marker marker_at(const MonthlySeries& s, std::size_t index) { return {s.date_at(index), index, s.at(index)}; }

using MonthWindow = std::pair<YearMonth, YearMonth>;

struct SelectionStrategy {
    enum class Mode { AutoFirstTwo, ExplicitIndices, WindowMax };

    Mode mode = Mode::AutoFirstTwo;
    std::optional<std::pair<MonthWindow, MonthWindow>> windows;
    std::optional<std::pair<std::size_t, std::size_t>> explicit_indices;
    /// Accept explicit indices that are not detected peaks (a warning is recorded).
    bool force = false;

    static SelectionStrategy auto_first_two() { return {}; }
    static SelectionStrategy window_max(MonthWindow first, MonthWindow second) {
        return {Mode::WindowMax, std::pair{first, second}, std::nullopt, false};
    }
    static SelectionStrategy explicit_pair(std::size_t i1, std::size_t i2, bool force = false) {
        return {Mode::ExplicitIndices, std::nullopt, std::pair{i1, i2}, force};
    }

    void validate() const {
        switch (mode) {
            case Mode::AutoFirstTwo:
                if (windows || explicit_indices) throw ConfigError("auto_first_two takes no windows or indices");
                break;
            case Mode::WindowMax:
                if (!windows || explicit_indices) throw ConfigError("window_max needs exactly two windows");
                for (const auto& w : {windows->first, windows->second}) {
                    if (w.second < w.first) throw ConfigError("window " + w.first.str() + ".." + w.second.str() + " is empty");
                }
                break;
            case Mode::ExplicitIndices:
                if (!explicit_indices || windows) throw ConfigError("explicit_indices needs exactly two indices");
                break;
        }
    }
};

inline std::string_view to_string(SelectionStrategy::Mode m) {
    switch (m) {
        case SelectionStrategy::Mode::AutoFirstTwo: return "auto_first_two";
        case SelectionStrategy::Mode::ExplicitIndices: return "explicit_indices";
        case SelectionStrategy::Mode::WindowMax: return "window_max";
    }
    return "?";
}

inline SelectionStrategy::Mode parse_selection_mode(std::string_view s) {
    if (s == "auto_first_two") return SelectionStrategy::Mode::AutoFirstTwo;
    if (s == "explicit_indices") return SelectionStrategy::Mode::ExplicitIndices;
    if (s == "window_max") return SelectionStrategy::Mode::WindowMax;
    throw ConfigError("unknown selection mode '" + std::string(s) + "'");
}

enum class TrendDirection { Rising, Falling, Flat };

inline std::string_view to_string(TrendDirection d) {
    switch (d) {
        case TrendDirection::Rising: return "rising";
        case TrendDirection::Falling: return "falling";
        case TrendDirection::Flat: return "flat";
    }
    return "?";
}

struct CycleReport {
    std::string label;
    Marker peak1;
    Marker peak2;
    Marker trough;
    double period_years = 0.0;
    double rpd_percent = 0.0;
    TrendDirection trend_direction_last_24m = TrendDirection::Flat;
    PeakOptions options;
    SelectionStrategy strategy;
    std::vector<Peak> candidates;
    std::vector<std::string> warnings;
    std::vector<std::string> assumptions;
};

/// Percent drop from a peak to a trough, relative to the peak.
inline double relative_percent_difference(double peak_amp, double trough_amp) {
    if (!(peak_amp > 0.0)) throw DomainError("peak amplitude must be positive, got " + std::to_string(peak_amp));
    return 100.0 * (peak_amp - trough_amp) / peak_amp;
}

/// Change over the last 24 months; |delta| below one trend unit is flat.
inline TrendDirection trend_direction(const MonthlySeries& trend) {
    if (trend.size() < 25) throw LengthError("trend direction needs at least 25 months");
    const double delta = trend.at(trend.size()) - trend.at(trend.size() - 24);
    if (std::abs(delta) < 1.0) return TrendDirection::Flat;
    return delta > 0 ? TrendDirection::Rising : TrendDirection::Falling;
}

inline std::string describe_candidates(const MonthlySeries& trend, const std::vector<Peak>& peaks) {
    if (peaks.empty()) return "  (no candidates)\n";
    std::ostringstream out;
    char buf[128];
    for (const auto& p : peaks) {
        std::snprintf(buf, sizeof buf, "  %s index=%zu value=%.4f start=%zu end=%zu\n",
                      trend.date_at(p.index).str().c_str(), p.index, p.value, p.start, p.end);
        out << buf;
    }
    return out.str();
}

namespace detail {

/// Invariant violations here are programming defects, not data errors.
inline void check_report(const CycleReport& r) {
    if (!(r.peak1.index < r.trough.index && r.trough.index < r.peak2.index)) {
        throw std::logic_error("cycle report markers out of order");
    }
    if (r.period_years != period_years(r.peak1.index, r.peak2.index)) {
        throw std::logic_error("cycle report period inconsistent with peak indices");
    }
}

} // namespace detail

/// Chooses two peaks per `strategy`, locates the trough between them and
/// derives period and peak-to-trough drop.
inline CycleReport analyze(const MonthlySeries& trend, const PeakOptions& opts, const SelectionStrategy& strategy) {
    if (trend.size() < 25) {
        throw LengthError("cycle analysis needs at least 25 months, got " + std::to_string(trend.size()));
    }
    strategy.validate();

    CycleReport report;
    report.label = trend.label();
    report.options = opts;
    report.strategy = strategy;
    report.candidates = find_peaks(trend.values(), opts);
    report.assumptions.push_back("trough amplitude read from the trend series, not raw counts");

    std::vector<Peak> by_position = report.candidates;
    std::sort(by_position.begin(), by_position.end(), [](const Peak& l, const Peak& r) { return l.index < r.index; });

    auto insufficient = [&] {
        return InsufficiencyError("'" + trend.label() + "': found " + std::to_string(by_position.size()) +
                                      " peak(s), need at least 2",
                                  describe_candidates(trend, by_position));
    };

    std::size_t i1 = 0, i2 = 0;
    switch (strategy.mode) {
        case SelectionStrategy::Mode::AutoFirstTwo:
            if (by_position.size() < 2) throw insufficient();
            i1 = by_position[0].index;
            i2 = by_position[1].index;
            break;
        case SelectionStrategy::Mode::WindowMax: {
            if (by_position.size() < 2) throw insufficient();
            auto pick = [&](const MonthWindow& w) {
                const Peak* best = nullptr;
                for (const auto& p : by_position) {
                    const auto d = trend.date_at(p.index);
                    if (d < w.first || w.second < d) continue;
                    if (!best || p.value > best->value) best = &p;
                }
                if (!best) {
                    throw SelectionError("no detected peak of '" + trend.label() + "' in window " + w.first.str() +
                                         ".." + w.second.str());
                }
                return best->index;
            };
            i1 = pick(strategy.windows->first);
            i2 = pick(strategy.windows->second);
            break;
        }
        case SelectionStrategy::Mode::ExplicitIndices: {
            i1 = strategy.explicit_indices->first;
            i2 = strategy.explicit_indices->second;
            for (auto i : {i1, i2}) {
                if (i < 1 || i > trend.size()) {
                    throw SelectionError("explicit peak index " + std::to_string(i) + " outside 1.." +
                                         std::to_string(trend.size()));
                }
                const bool detected = std::any_of(by_position.begin(), by_position.end(),
                                                  [&](const Peak& p) { return p.index == i; });
                if (detected) continue;
                const auto msg = "index " + std::to_string(i) + " (" + trend.date_at(i).str() +
                                 ") is not a detected peak";
                if (!strategy.force) throw SelectionError("'" + trend.label() + "': " + msg);
                report.warnings.push_back("forced: " + msg);
            }
            break;
        }
    }
    if (i2 <= i1 + 1) {
        throw SelectionError("selected peaks " + std::to_string(i1) + " and " + std::to_string(i2) +
                             " leave no room for a trough");
    }

    const auto trough = find_trough(trend.values(), i1, i2);
    report.peak1 = marker_at(trend, i1);
    report.peak2 = marker_at(trend, i2);
    report.trough = marker_at(trend, trough.index);
    report.period_years = period_years(i1, i2);
    report.rpd_percent = relative_percent_difference(std::max(report.peak1.amplitude, report.peak2.amplitude),
                                                     report.trough.amplitude);
    report.trend_direction_last_24m = trend_direction(trend);
    detail::check_report(report);
    return report;
}

/// `label: P1=YYYY-MM[amp] T=YYYY-MM[amp] P2=YYYY-MM[amp] period=Yy rpd=Z%`
/// using the same 4-decimal rounding as the JSON report.
inline std::string summary_line(const CycleReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: P1=%s[%.4f] T=%s[%.4f] P2=%s[%.4f] period=%.4fy rpd=%.4f%%", r.label.c_str(),
                  r.peak1.date.str().c_str(), r.peak1.amplitude, r.trough.date.str().c_str(), r.trough.amplitude,
                  r.peak2.date.str().c_str(), r.peak2.amplitude, r.period_years, r.rpd_percent);
    return buf;
}

} // namespace mdcycles
