#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdcycles/error.hpp"

namespace mdcycles {

struct PeakOptions {
    int nups = 1;
    std::optional<int> ndowns; ///< defaults to nups
    double minpeakheight = -std::numeric_limits<double>::infinity();
    double threshold = 0.0;
    int minpeakdistance = 1;
    int npeaks = 0; ///< 0 keeps all
    bool sort_desc = false;

    int downs() const { return ndowns.value_or(nups); }

    void validate() const {
        if (nups < 1) throw DomainError("nups must be >= 1");
        if (downs() < 1) throw DomainError("ndowns must be >= 1");
        if (!(threshold >= 0.0)) throw DomainError("threshold must be >= 0");
        if (minpeakdistance < 1) throw DomainError("minpeakdistance must be >= 1");
        if (npeaks < 0) throw DomainError("npeaks must be >= 0");
    }
};

/// Local maximum. All positions are 1-based.
struct Peak {
    double value = 0.0;
    std::size_t index = 0;
    std::size_t start = 0; ///< first point of the ascending run
    std::size_t end = 0;   ///< last point of the descending run

    bool operator==(const Peak&) const = default;
};

/// Pattern-based peak search.
///
/// Runs of equal values are collapsed and represented by their first index.
/// A point is a candidate when the collapsed sequence climbs strictly for at
/// least `nups` steps into it and falls strictly for at least `ndowns` steps
/// after it; `start`/`end` span the full climb and fall. Candidates must reach
/// `minpeakheight` and stand at least `threshold` above the higher of the two
/// pattern ends. `minpeakdistance` then keeps the higher of any two peaks that
/// are too close (the earlier one on ties). Output is in position order, or by
/// decreasing height with `sort_desc`, truncated to `npeaks` when non-zero.
inline std::vector<Peak> find_peaks(std::span<const double> x, const PeakOptions& opts = {}) {
    opts.validate();
    if (x.size() < 3) throw LengthError("peak search needs at least 3 values, got " + std::to_string(x.size()));

    struct Run {
        std::size_t index;
        double value;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (runs.empty() || runs.back().value != x[i]) runs.push_back({i + 1, x[i]});
    }

    std::vector<Peak> found;
    const auto nups = static_cast<std::size_t>(opts.nups);
    const auto ndowns = static_cast<std::size_t>(opts.downs());
    for (std::size_t k = 1; k + 1 < runs.size(); ++k) {
        if (!(runs[k - 1].value < runs[k].value && runs[k + 1].value < runs[k].value)) continue;
        std::size_t a = k, b = k;
        while (a > 0 && runs[a - 1].value < runs[a].value) --a;
        while (b + 1 < runs.size() && runs[b + 1].value < runs[b].value) ++b;
        if (k - a < nups || b - k < ndowns) continue;
        const double v = runs[k].value;
        if (v < opts.minpeakheight) continue;
        if (v - std::max(runs[a].value, runs[b].value) < opts.threshold) continue;
        found.push_back({v, runs[k].index, runs[a].index, runs[b].index});
    }

    auto higher_first = [](const Peak& l, const Peak& r) {
        return l.value != r.value ? l.value > r.value : l.index < r.index;
    };

    if (opts.minpeakdistance > 1 && found.size() > 1) {
        const auto dist = static_cast<std::size_t>(opts.minpeakdistance);
        std::vector<Peak> by_height = found;
        std::sort(by_height.begin(), by_height.end(), higher_first);
        std::vector<Peak> kept;
        for (const auto& p : by_height) {
            bool clear = std::all_of(kept.begin(), kept.end(), [&](const Peak& q) {
                return (p.index > q.index ? p.index - q.index : q.index - p.index) >= dist;
            });
            if (clear) kept.push_back(p);
        }
        std::sort(kept.begin(), kept.end(), [](const Peak& l, const Peak& r) { return l.index < r.index; });
        found = std::move(kept);
    }

    if (opts.sort_desc) std::stable_sort(found.begin(), found.end(), higher_first);
    if (opts.npeaks > 0 && found.size() > static_cast<std::size_t>(opts.npeaks)) {
        found.resize(static_cast<std::size_t>(opts.npeaks));
    }
    return found;
}

struct Extremum {
    std::size_t index = 0; ///< 1-based
    double value = 0.0;
};

/// Lowest point strictly between two 1-based positions; the earliest wins ties.
inline Extremum find_trough(std::span<const double> x, std::size_t i1, std::size_t i2) {
    if (i1 < 1 || i2 > x.size()) {
        throw RangeError("trough bounds " + std::to_string(i1) + ".." + std::to_string(i2) + " outside 1.." +
                         std::to_string(x.size()));
    }
    if (i2 <= i1 + 1) {
        throw RangeError("no points strictly between " + std::to_string(i1) + " and " + std::to_string(i2));
    }
    Extremum best{i1 + 1, x[i1]};
    for (std::size_t i = i1 + 1; i < i2; ++i) {
        if (x[i - 1] < best.value) best = {i, x[i - 1]};
    }
    return best;
}

} // namespace mdcycles
