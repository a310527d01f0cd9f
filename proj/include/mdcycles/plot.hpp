#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mdcycles/cycle.hpp"
#include "mdcycles/error.hpp"
#include "mdcycles/series.hpp"

namespace mdcycles {

struct TraceSpec {
    MonthlySeries series;
    std::string color;
    std::string name;
};

struct MarkerRule {
    Marker marker;
    std::string color;
};

struct FigureSpec {
    std::vector<TraceSpec> traces;
    std::vector<MarkerRule> markers; ///< each draws one vertical (date) and one horizontal (amplitude) rule
    int width = 960;
    int height = 540;
    std::optional<std::pair<YearMonth, YearMonth>> x_range;
    std::optional<std::pair<double, double>> y_range;
    std::string title;
};

namespace detail {

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Tick spacing from {1,2,5}x10^k giving at most `max_ticks` intervals.
inline double nice_step(double span, int max_ticks) {
    const double raw = span / max_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

} // namespace detail

/// Renders trends and marker rules as a standalone SVG document. Output is a
/// pure function of the spec: fixed two-decimal coordinates, no timestamps.
inline std::string render_svg(const FigureSpec& spec) {
    if (spec.traces.empty()) throw DomainError("figure has no traces");
    if (spec.width < 200 || spec.height < 150) throw DomainError("canvas too small");

    YearMonth x_lo = spec.traces.front().series.start();
    YearMonth x_hi = spec.traces.front().series.end();
    double y_lo = spec.traces.front().series.at(1), y_hi = y_lo;
    for (const auto& t : spec.traces) {
        x_lo = std::min(x_lo, t.series.start());
        x_hi = std::max(x_hi, t.series.end());
        for (double v : t.series.values()) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (spec.x_range) {
        x_lo = spec.x_range->first;
        x_hi = spec.x_range->second;
    }
    if (spec.y_range) {
        y_lo = spec.y_range->first;
        y_hi = spec.y_range->second;
    } else {
        if (y_hi == y_lo) {
            y_lo -= 1.0;
            y_hi += 1.0;
        }
        const double step = detail::nice_step(y_hi - y_lo, 8);
        y_lo = std::floor(y_lo / step) * step;
        y_hi = std::ceil(y_hi / step) * step;
    }
    if (!(x_lo < x_hi) || !(y_lo < y_hi)) throw DomainError("empty axis range");
    for (const auto& m : spec.markers) {
        if (m.marker.date < x_lo || x_hi < m.marker.date || m.marker.amplitude < y_lo || m.marker.amplitude > y_hi) {
            throw DomainError("marker " + m.marker.date.str() + " lies outside the axis ranges");
        }
    }

    const double left = 70, right = 20, top = spec.title.empty() ? 20 : 40, bottom = 50;
    const double plot_w = spec.width - left - right;
    const double plot_h = spec.height - top - bottom;
    const double months = static_cast<double>(x_hi.months_since(x_lo));
    auto px = [&](YearMonth d) { return left + plot_w * static_cast<double>(d.months_since(x_lo)) / months; };
    auto py = [&](double v) { return top + plot_h * (y_hi - v) / (y_hi - y_lo); };

    using detail::fmt2;
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height << "\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        svg << "<text x=\"" << fmt2(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
            << detail::xml_escape(spec.title) << "</text>\n";
    }

    // axes
    svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    svg << "<line x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(top + plot_h) << "\" x2=\"" << fmt2(left + plot_w)
        << "\" y2=\"" << fmt2(top + plot_h) << "\"/>\n";
    svg << "<line x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(top) << "\" x2=\"" << fmt2(left) << "\" y2=\""
        << fmt2(top + plot_h) << "\"/>\n";
    svg << "</g>\n";

    const int year_span = x_hi.year() - x_lo.year();
    const int year_step = year_span > 20 ? 5 : (year_span > 8 ? 2 : 1);
    svg << "<g class=\"xticks\">\n";
    for (int y = (x_lo.year() + year_step - 1) / year_step * year_step; y <= x_hi.year(); y += year_step) {
        const YearMonth d{y, 1};
        if (d < x_lo) continue;
        const double x = px(d);
        svg << "<line x1=\"" << fmt2(x) << "\" y1=\"" << fmt2(top + plot_h) << "\" x2=\"" << fmt2(x) << "\" y2=\""
            << fmt2(top + plot_h + 5) << "\" stroke=\"black\"/>";
        svg << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(top + plot_h + 18) << "\" text-anchor=\"middle\">" << y
            << "</text>\n";
    }
    svg << "</g>\n";

    const double y_step = detail::nice_step(y_hi - y_lo, 8);
    svg << "<g class=\"yticks\">\n";
    for (double v = std::ceil(y_lo / y_step) * y_step; v <= y_hi + 1e-9 * y_step; v += y_step) {
        const double y = py(v);
        char label[32];
        std::snprintf(label, sizeof label, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
        svg << "<line x1=\"" << fmt2(left - 5) << "\" y1=\"" << fmt2(y) << "\" x2=\"" << fmt2(left) << "\" y2=\""
            << fmt2(y) << "\" stroke=\"black\"/>";
        svg << "<text x=\"" << fmt2(left - 8) << "\" y=\"" << fmt2(y + 4) << "\" text-anchor=\"end\">" << label
            << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << fmt2(left + plot_w / 2) << "\" y=\"" << fmt2(spec.height - 10.0)
        << "\" text-anchor=\"middle\">Year</text>\n";
    svg << "<text x=\"16\" y=\"" << fmt2(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << fmt2(top + plot_h / 2) << ")\">Monthly count (trend)</text>\n";

    for (const auto& t : spec.traces) {
        svg << "<polyline class=\"trend\" fill=\"none\" stroke=\"" << detail::xml_escape(t.color)
            << "\" stroke-width=\"1.5\" data-name=\"" << detail::xml_escape(t.name) << "\" points=\"";
        bool first = true;
        for (std::size_t i = 1; i <= t.series.size(); ++i) {
            const auto d = t.series.date_at(i);
            if (d < x_lo || x_hi < d) continue;
            const double v = std::clamp(t.series.at(i), y_lo, y_hi);
            if (!first) svg << ' ';
            first = false;
            svg << fmt2(px(d)) << ',' << fmt2(py(v));
        }
        svg << "\"/>\n";
    }

    for (const auto& m : spec.markers) {
        const double x = px(m.marker.date), y = py(m.marker.amplitude);
        const auto color = detail::xml_escape(m.color);
        svg << "<line class=\"vrule\" x1=\"" << fmt2(x) << "\" y1=\"" << fmt2(top) << "\" x2=\"" << fmt2(x)
            << "\" y2=\"" << fmt2(top + plot_h) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
        svg << "<line class=\"hrule\" x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(y) << "\" x2=\"" << fmt2(left + plot_w)
            << "\" y2=\"" << fmt2(y) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace mdcycles
