#pragma once

#include <string>

#include "mdcycles/config.hpp"
#include "mdcycles/cycle.hpp"
#include "mdcycles/decompose.hpp"
#include "mdcycles/series.hpp"

namespace mdcycles {

struct AnalysisResult {
    Decomposition decomposition;
    CycleReport report;
};

/// decompose -> find_peaks -> analyze for one series.
inline AnalysisResult run_analysis(const MonthlySeries& series, const AnalysisConfig& cfg) {
    auto d = decompose(series, cfg.decompose);
    auto report = analyze(d.trend.relabeled(series.label()), cfg.peaks, cfg.selection);
    if (cfg.decompose.filter == TrendFilter::Refined) {
        report.assumptions.push_back("trend: refined moving average, lag " + std::to_string(d.lag) +
                                     (cfg.decompose.lag ? " (fixed)" : " (selected from data)"));
    } else {
        report.assumptions.push_back("trend: centered " + std::to_string(cfg.decompose.period) + "-month moving average");
    }
    return {std::move(d), std::move(report)};
}

} // namespace mdcycles
