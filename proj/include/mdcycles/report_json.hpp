#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdcycles/cycle.hpp"

namespace mdcycles {

using ordered_json = nlohmann::ordered_json;

/// Value as printed with "%.4f", so JSON and text summaries agree exactly.
inline double round4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::strtod(buf, nullptr);
}

inline ordered_json marker_json(const Marker& m) {
    ordered_json j;
    j["date"] = m.date.str();
    j["index"] = m.index;
    j["amplitude"] = round4(m.amplitude);
    return j;
}

inline ordered_json peak_options_json(const PeakOptions& o) {
    ordered_json j;
    j["nups"] = o.nups;
    j["ndowns"] = o.downs();
    j["minpeakheight"] = std::isfinite(o.minpeakheight) ? ordered_json(round4(o.minpeakheight)) : ordered_json(nullptr);
    j["threshold"] = round4(o.threshold);
    j["minpeakdistance"] = o.minpeakdistance;
    j["npeaks"] = o.npeaks;
    j["sort_desc"] = o.sort_desc;
    return j;
}

inline ordered_json to_json(const CycleReport& r) {
    ordered_json j;
    j["label"] = r.label;
    j["peak1"] = marker_json(r.peak1);
    j["peak2"] = marker_json(r.peak2);
    j["trough"] = marker_json(r.trough);
    j["period_years"] = round4(r.period_years);
    j["rpd_percent"] = round4(r.rpd_percent);
    j["trend_direction_last_24m"] = std::string(to_string(r.trend_direction_last_24m));

    ordered_json sel;
    sel["mode"] = std::string(to_string(r.strategy.mode));
    if (r.strategy.windows) {
        auto w = [](const MonthWindow& m) { return ordered_json::array({m.first.str(), m.second.str()}); };
        sel["windows"] = ordered_json::array({w(r.strategy.windows->first), w(r.strategy.windows->second)});
    } else {
        sel["windows"] = nullptr;
    }
    if (r.strategy.explicit_indices) {
        sel["explicit"] = ordered_json::array({r.strategy.explicit_indices->first, r.strategy.explicit_indices->second});
    } else {
        sel["explicit"] = nullptr;
    }
    sel["force"] = r.strategy.force;
    sel["peak_options"] = peak_options_json(r.options);
    ordered_json cands = ordered_json::array();
    for (const auto& p : r.candidates) {
        ordered_json c;
        c["index"] = p.index;
        c["value"] = round4(p.value);
        c["start"] = p.start;
        c["end"] = p.end;
        cands.push_back(std::move(c));
    }
    sel["candidates"] = std::move(cands);
    sel["warnings"] = r.warnings;
    sel["assumptions"] = r.assumptions;
    j["selection"] = std::move(sel);
    return j;
}

/// Markers recovered from a serialized report, for plotting.
struct ReportMarkers {
    std::string label;
    std::vector<Marker> markers; ///< peak1, trough, peak2
};

inline ReportMarkers markers_from_json(const nlohmann::json& j) {
    try {
        ReportMarkers out;
        out.label = j.at("label").get<std::string>();
        for (const char* key : {"peak1", "trough", "peak2"}) {
            const auto& m = j.at(key);
            out.markers.push_back({YearMonth::parse(m.at("date").get<std::string>()), m.at("index").get<std::size_t>(),
                                   m.at("amplitude").get<double>()});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed cycle report: ") + e.what());
    }
}

} // namespace mdcycles
