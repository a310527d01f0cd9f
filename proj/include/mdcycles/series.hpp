#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdcycles/error.hpp"
#include "mdcycles/year_month.hpp"

namespace mdcycles {

/// Monthly observations starting at `start`. Observation i (1-based) is dated
/// start + (i-1) months. Immutable once built; non-empty and finite.
class MonthlySeries {
public:
    MonthlySeries(std::string label, YearMonth start, std::vector<double> values)
        : label_(std::move(label)), start_(start), values_(std::move(values)) {
        if (values_.empty()) throw LengthError("series '" + label_ + "' is empty");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw DomainError("series '" + label_ + "' has a non-finite value at index " +
                                  std::to_string(i + 1));
            }
        }
    }

    const std::string& label() const noexcept { return label_; }
    YearMonth start() const noexcept { return start_; }
    YearMonth end() const { return start_.plus_months(static_cast<long long>(values_.size()) - 1); }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }

    /// 1-based access.
    double at(std::size_t index) const {
        check_index(index);
        return values_[index - 1];
    }

    YearMonth date_at(std::size_t index) const {
        check_index(index);
        return start_.plus_months(static_cast<long long>(index) - 1);
    }

    std::size_t index_of(YearMonth date) const {
        long long off = date.months_since(start_);
        if (off < 0 || off >= static_cast<long long>(values_.size())) {
            throw RangeError(date.str() + " outside series '" + label_ + "' range " + start_.str() +
                             ".." + end().str());
        }
        return static_cast<std::size_t>(off) + 1;
    }

    MonthlySeries relabeled(std::string label) const { return {std::move(label), start_, values_}; }

private:
    void check_index(std::size_t index) const {
        if (index < 1 || index > values_.size()) {
            throw RangeError("index " + std::to_string(index) + " outside 1.." +
                             std::to_string(values_.size()) + " of series '" + label_ + "'");
        }
    }

    std::string label_;
    YearMonth start_;
    std::vector<double> values_;
};

inline YearMonth index_to_date(const MonthlySeries& s, std::size_t index) { return s.date_at(index); }

inline std::size_t date_to_index(const MonthlySeries& s, YearMonth date) { return s.index_of(date); }

/// Element-wise sum of two aligned series; the label joins both inputs with '+'.
inline MonthlySeries composite(const MonthlySeries& a, const MonthlySeries& b) {
    if (a.start() != b.start() || a.size() != b.size()) {
        throw AlignmentError("cannot combine '" + a.label() + "' (" + a.start().str() + ", n=" +
                             std::to_string(a.size()) + ") with '" + b.label() + "' (" +
                             b.start().str() + ", n=" + std::to_string(b.size()) + ")");
    }
    std::vector<double> sum(a.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a.values()[i] + b.values()[i];
    return {a.label() + "+" + b.label(), a.start(), std::move(sum)};
}

/// Years between two 1-based monthly indices.
inline double period_years(std::size_t i1, std::size_t i2) {
    if (i2 < i1) {
        throw OrderingError("period end index " + std::to_string(i2) + " precedes start index " +
                            std::to_string(i1));
    }
    return static_cast<double>(i2 - i1) / 12.0;
}

} // namespace mdcycles
