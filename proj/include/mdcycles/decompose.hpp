#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mdcycles/error.hpp"
#include "mdcycles/series.hpp"

namespace mdcycles {

/// Centered moving average of a `period`-long cycle. Even periods use the
/// 2xm weights (1/2, 1, ..., 1, 1/2)/m; odd periods the plain m-term mean.
/// Near the ends the window is cut to the available points and the remaining
/// weights are renormalized, so every position gets a value.
inline std::vector<double> centered_ma(std::span<const double> x, int period) {
    if (period < 2) throw DomainError("moving-average period must be >= 2, got " + std::to_string(period));
    if (x.size() < static_cast<std::size_t>(period) + 1) {
        throw LengthError("centered moving average needs at least " + std::to_string(period + 1) +
                          " values, got " + std::to_string(x.size()));
    }
    const int half = period / 2;
    std::vector<double> weights(static_cast<std::size_t>(2 * half + 1), 1.0);
    if (period % 2 == 0) weights.front() = weights.back() = 0.5;

    const auto n = static_cast<long>(x.size());
    std::vector<double> out(x.size());
    for (long i = 0; i < n; ++i) {
        double sum = 0.0, wsum = 0.0;
        for (long k = -half; k <= half; ++k) {
            const long j = i + k;
            if (j < 0 || j >= n) continue;
            const double w = weights[static_cast<std::size_t>(k + half)];
            sum += w * x[static_cast<std::size_t>(j)];
            wsum += w;
        }
        out[static_cast<std::size_t>(i)] = sum / wsum;
    }
    return out;
}

/// (2*lag+1)-term moving average with local-linear end correction: each
/// output is the least-squares line through the window [i-lag, i+lag]
/// (clipped to the data) evaluated at i. Where the window is complete this is
/// the plain mean; at the ends it follows the local slope instead of being
/// pulled toward the edge values.
inline std::vector<double> refined_ma(std::span<const double> x, int lag) {
    if (lag < 0) throw DomainError("moving-average lag must be >= 0, got " + std::to_string(lag));
    if (x.empty()) throw LengthError("refined moving average of an empty sequence");
    const auto n = static_cast<long>(x.size());
    std::vector<double> out(x.size());
    for (long i = 0; i < n; ++i) {
        const long lo = std::max(0L, i - lag);
        const long hi = std::min(n - 1, i + lag);
        double s0 = 0, s1 = 0, s2 = 0, y0 = 0, y1 = 0;
        for (long j = lo; j <= hi; ++j) {
            const double t = static_cast<double>(j - i);
            const double y = x[static_cast<std::size_t>(j)];
            s0 += 1;
            s1 += t;
            s2 += t * t;
            y0 += y;
            y1 += t * y;
        }
        const double det = s0 * s2 - s1 * s1;
        out[static_cast<std::size_t>(i)] = det > 0 ? (s2 * y0 - s1 * y1) / det : y0 / s0;
    }
    return out;
}

namespace detail {

/// Least-squares cubic through (v_i, y_i); returns coefficients c0..c3.
inline std::array<double, 4> fit_cubic(std::span<const double> v, std::span<const double> y) {
    std::array<std::array<double, 5>, 4> a{};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::array<double, 4> p{1.0, v[i], v[i] * v[i], v[i] * v[i] * v[i]};
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) a[r][c] += p[r] * p[c];
            a[r][4] += p[r] * y[i];
        }
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        std::swap(a[col], a[piv]);
        if (a[col][col] == 0.0) throw DomainError("cubic pilot fit is singular");
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return {a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]};
}

} // namespace detail

/// Data-driven lag for refined_ma. Plug-in minimiser of the asymptotic MSE
/// of a (2q+1)-term mean, with bias m''q^2/(6n^2) and variance sigma^2/(2q):
///
///     q = floor( (4.5 * sigma^2 / mean(m''^2))^(1/5) * n^(4/5) )
///
/// m'' (in rescaled time u = i/n) and sigma^2 come from a cubic pilot fit.
/// Clamped to [1, (n-1)/2]; a pilot with no curvature gets the upper bound.
inline int optimal_lag(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 6) throw LengthError("lag selection needs at least 6 values, got " + std::to_string(n));
    const int max_lag = static_cast<int>((n - 1) / 2);

    // fit on v = 2u - 1 in [-1, 1]; d2/du2 = 4 * d2/dv2
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 2.0 * static_cast<double>(i + 1) / static_cast<double>(n) - 1.0;
    const auto c = detail::fit_cubic(v, x);

    double rss = 0.0, curvature = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = c[0] + v[i] * (c[1] + v[i] * (c[2] + v[i] * c[3]));
        rss += (x[i] - fit) * (x[i] - fit);
        const double m2 = 4.0 * (2.0 * c[2] + 6.0 * c[3] * v[i]);
        curvature += m2 * m2;
    }
    const double sigma2 = rss / static_cast<double>(n - 4);
    curvature /= static_cast<double>(n);

    double scale = 0.0;
    for (double xi : x) scale = std::max(scale, std::abs(xi));
    if (curvature <= 1e-24 * std::max(1.0, scale * scale)) return max_lag;

    const double q = std::pow(4.5 * sigma2 / curvature, 0.2) * std::pow(static_cast<double>(n), 0.8);
    return std::clamp(static_cast<int>(std::floor(q)), 1, max_lag);
}

/// Additive seasonal indices. Position j belongs to phase
/// (j + start_phase) mod period; w_k is the mean of the present values at
/// phase k and the result is w_k - mean(w), so the indices sum to zero.
inline std::vector<double> seasonal_indices(std::span<const std::optional<double>> detrended, int period,
                                            int start_phase) {
    if (period < 2) throw DomainError("seasonal period must be >= 2, got " + std::to_string(period));
    if (start_phase < 0 || start_phase >= period) {
        throw DomainError("start phase " + std::to_string(start_phase) + " outside 0.." + std::to_string(period - 1));
    }
    std::vector<double> sum(static_cast<std::size_t>(period), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(period), 0);
    for (std::size_t j = 0; j < detrended.size(); ++j) {
        if (!detrended[j]) continue;
        const auto k = (j + static_cast<std::size_t>(start_phase)) % static_cast<std::size_t>(period);
        sum[k] += *detrended[j];
        ++count[k];
    }
    double mean = 0.0;
    for (std::size_t k = 0; k < sum.size(); ++k) {
        if (count[k] == 0) throw CoverageError("no observations at seasonal phase " + std::to_string(k));
        sum[k] /= static_cast<double>(count[k]);
        mean += sum[k];
    }
    mean /= static_cast<double>(period);
    for (auto& w : sum) w -= mean;
    return sum;
}

inline std::vector<double> seasonal_indices(std::span<const double> detrended, int period, int start_phase) {
    std::vector<std::optional<double>> present(detrended.begin(), detrended.end());
    return seasonal_indices(std::span<const std::optional<double>>(present), period, start_phase);
}

/// Filter used for the final (deseasonalized) trend.
enum class TrendFilter {
    Refined,  ///< refined_ma with optimal_lag, or a fixed lag when given
    Centered, ///< centered_ma with the seasonal period
};

struct DecomposeOptions {
    int period = 12;
    bool seasonal = true;
    TrendFilter filter = TrendFilter::Refined;
    std::optional<int> lag; ///< fixes the refined lag instead of selecting it
};

struct Decomposition {
    MonthlySeries source;
    MonthlySeries trend;
    MonthlySeries seasonal;
    MonthlySeries residual;
    std::vector<double> indices; ///< one per phase; phase 0 = January when period is 12
    int period = 12;
    TrendFilter filter = TrendFilter::Refined;
    int lag = 0; ///< refined lag actually used, 0 for the centered filter
};

/// Calendar phase of the first observation.
inline int start_phase(YearMonth start, int period) {
    const long long p = static_cast<long long>(start.month() - 1) % period;
    return static_cast<int>(p);
}

/// Classical additive decomposition with a refined trend:
///   1. provisional trend = centered_ma(source)
///   2. indices = seasonal_indices(source - provisional)
///   3. deseasonalized = source - periodic extension of the indices
///   4. trend = trend filter of the deseasonalized series
///   5. residual = source - trend - seasonal
/// Without seasonality steps 1-3 are skipped and the filter runs on the source.
inline Decomposition decompose(const MonthlySeries& s, const DecomposeOptions& opts = {}) {
    const int period = opts.period;
    if (period < 2) throw DomainError("seasonal period must be >= 2, got " + std::to_string(period));
    if (s.size() < static_cast<std::size_t>(2 * period + 1)) {
        throw LengthError("decomposition of '" + s.label() + "' needs at least " + std::to_string(2 * period + 1) +
                          " months, got " + std::to_string(s.size()));
    }
    const auto x = s.values();
    const std::size_t n = x.size();
    const int phase0 = start_phase(s.start(), period);

    std::vector<double> indices(static_cast<std::size_t>(period), 0.0);
    std::vector<double> seasonal(n, 0.0);
    if (opts.seasonal) {
        const auto provisional = centered_ma(x, period);
        std::vector<double> detrended(n);
        for (std::size_t i = 0; i < n; ++i) detrended[i] = x[i] - provisional[i];
        indices = seasonal_indices(std::span<const double>(detrended), period, phase0);
        for (std::size_t i = 0; i < n; ++i) {
            seasonal[i] = indices[(i + static_cast<std::size_t>(phase0)) % static_cast<std::size_t>(period)];
        }
    }

    std::vector<double> adjusted(n);
    for (std::size_t i = 0; i < n; ++i) adjusted[i] = x[i] - seasonal[i];

    int lag = 0;
    std::vector<double> trend;
    if (opts.filter == TrendFilter::Centered) {
        trend = centered_ma(adjusted, period);
    } else {
        lag = opts.lag ? *opts.lag : optimal_lag(adjusted);
        trend = refined_ma(adjusted, lag);
    }

    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = x[i] - trend[i] - seasonal[i];

    return {s,
            MonthlySeries(s.label() + ".trend", s.start(), std::move(trend)),
            MonthlySeries(s.label() + ".seasonal", s.start(), std::move(seasonal)),
            MonthlySeries(s.label() + ".residual", s.start(), std::move(residual)),
            std::move(indices),
            period,
            opts.filter,
            lag};
}

/// `date,data,trend,seasonal,residual`, six decimals.
inline void write_decomposition_csv(std::ostream& out, const Decomposition& d) {
    out << "date,data,trend,seasonal,residual\n";
    char buf[160];
    for (std::size_t i = 1; i <= d.source.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f\n", d.source.date_at(i).str().c_str(),
                      d.source.at(i), d.trend.at(i), d.seasonal.at(i), d.residual.at(i));
        out << buf;
    }
}

} // namespace mdcycles
