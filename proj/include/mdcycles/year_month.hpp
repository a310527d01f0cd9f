#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "mdcycles/error.hpp"

namespace mdcycles {

/// Calendar month. Ordering and arithmetic go through the absolute month
/// count year*12 + (month-1), so month always stays in 1..12.
class YearMonth {
public:
    constexpr YearMonth() = default;
    constexpr YearMonth(int year, int month) : year_(year), month_(month) {
        if (month < 1 || month > 12) {
            throw RangeError("month " + std::to_string(month) + " outside 1..12");
        }
    }

    static constexpr YearMonth from_absolute(long long months) {
        long long y = months / 12;
        long long m = months % 12;
        if (m < 0) {
            m += 12;
            --y;
        }
        return YearMonth(static_cast<int>(y), static_cast<int>(m) + 1);
    }

    constexpr int year() const noexcept { return year_; }
    constexpr int month() const noexcept { return month_; }
    constexpr long long absolute() const noexcept {
        return static_cast<long long>(year_) * 12 + (month_ - 1);
    }

    constexpr YearMonth plus_months(long long n) const { return from_absolute(absolute() + n); }

    /// Signed number of months from `other` to *this.
    constexpr long long months_since(const YearMonth& other) const noexcept {
        return absolute() - other.absolute();
    }

    constexpr auto operator<=>(const YearMonth& o) const noexcept { return absolute() <=> o.absolute(); }
    constexpr bool operator==(const YearMonth& o) const noexcept = default;

    /// "YYYY-MM"
    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
        return buf;
    }

    /// Parses "YYYY-MM".
    static YearMonth parse(std::string_view text) {
        auto fail = [&] { return ParseError("expected YYYY-MM, got '" + std::string(text) + "'"); };
        if (text.size() != 7 || text[4] != '-') throw fail();
        int y = 0, m = 0;
        auto r1 = std::from_chars(text.data(), text.data() + 4, y);
        auto r2 = std::from_chars(text.data() + 5, text.data() + 7, m);
        if (r1.ec != std::errc{} || r1.ptr != text.data() + 4 || r2.ec != std::errc{} ||
            r2.ptr != text.data() + 7 || m < 1 || m > 12) {
            throw fail();
        }
        return YearMonth(y, m);
    }

private:
    int year_ = 1970;
    int month_ = 1;
};

} // namespace mdcycles
