#include <random>

#include <gtest/gtest.h>

#include "mdcycles/series.hpp"

using namespace mdcycles;

namespace {

MonthlySeries may76(std::size_t n, double fill = 0.0) { return {"s", {1976, 5}, std::vector<double>(n, fill)}; }

} // namespace

TEST(YearMonth, ArithmeticKeepsMonthInRange) {
    const YearMonth may76{1976, 5};
    EXPECT_EQ(may76.plus_months(7), YearMonth(1976, 12));
    EXPECT_EQ(may76.plus_months(8), YearMonth(1977, 1));
    EXPECT_EQ(may76.plus_months(-5), YearMonth(1975, 12));
    EXPECT_EQ(YearMonth(2020, 12).months_since(may76), 535);
    for (long long k = -200; k <= 200; ++k) {
        auto d = may76.plus_months(k);
        EXPECT_GE(d.month(), 1);
        EXPECT_LE(d.month(), 12);
        EXPECT_EQ(d.months_since(may76), k);
    }
    EXPECT_THROW(YearMonth(2000, 13), RangeError);
    EXPECT_THROW(YearMonth(2000, 0), RangeError);
}

TEST(YearMonth, OrderingFollowsAbsoluteMonth) {
    EXPECT_LT(YearMonth(1992, 12), YearMonth(1993, 1));
    EXPECT_LT(YearMonth(1992, 4), YearMonth(1992, 9));
    EXPECT_EQ(YearMonth::parse("2019-03"), YearMonth(2019, 3));
    EXPECT_EQ(YearMonth(1976, 5).str(), "1976-05");
    EXPECT_THROW(YearMonth::parse("2019-3"), ParseError);
    EXPECT_THROW(YearMonth::parse("2019-13"), ParseError);
    EXPECT_THROW(YearMonth::parse("19x9-03"), ParseError);
}

TEST(MonthlySeries, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(MonthlySeries("e", {2000, 1}, {}), LengthError);
    EXPECT_THROW(MonthlySeries("n", {2000, 1}, {1.0, std::nan("")}), DomainError);
    EXPECT_THROW(MonthlySeries("i", {2000, 1}, {HUGE_VAL}), DomainError);
}

TEST(IndexToDate, Examples) {
    const auto s = may76(536);
    EXPECT_EQ(index_to_date(s, 1), YearMonth(1976, 5));
    EXPECT_EQ(index_to_date(s, 192), YearMonth(1992, 4));
    EXPECT_EQ(index_to_date(s, 515), YearMonth(2019, 3));
    EXPECT_EQ(index_to_date(s, 536), YearMonth(2020, 12));
}

TEST(IndexToDate, OutOfRangeNamesIndexAndLength) {
    const auto s = may76(536);
    try {
        index_to_date(s, 537);
        FAIL() << "expected RangeError";
    } catch (const RangeError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("537"), std::string::npos);
        EXPECT_NE(what.find("536"), std::string::npos);
    }
    EXPECT_THROW(index_to_date(s, 0), RangeError);
}

TEST(DateToIndex, Examples) {
    const auto s = may76(536);
    EXPECT_EQ(date_to_index(s, {1976, 5}), 1u);
    EXPECT_EQ(date_to_index(s, {2002, 2}), 310u);
    EXPECT_EQ(date_to_index(s, {1992, 9}), 197u);
    EXPECT_THROW(date_to_index(s, {1976, 4}), RangeError);
    EXPECT_THROW(date_to_index(s, {2021, 1}), RangeError);
}

TEST(DateToIndex, RoundTripsEveryIndex) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const YearMonth start{1950 + static_cast<int>(rng() % 70), 1 + static_cast<int>(rng() % 12)};
        const MonthlySeries s("s", start, std::vector<double>(1 + rng() % 600, 1.0));
        for (std::size_t i = 1; i <= s.size(); ++i) {
            ASSERT_EQ(date_to_index(s, index_to_date(s, i)), i);
        }
    }
}

TEST(Composite, SumsElementwise) {
    const MonthlySeries a("X510kr", {1976, 5}, {3, 128});
    const MonthlySeries b("PMAr", {1976, 5}, {4, 0});
    const auto c = composite(a, b);
    EXPECT_EQ(c.at(1), 7);
    EXPECT_EQ(c.at(2), 128);
    EXPECT_EQ(c.label(), "X510kr+PMAr");
    EXPECT_EQ(c.start(), a.start());

    const auto z = composite(may76(5), may76(5));
    for (double v : z.values()) EXPECT_EQ(v, 0.0);
}

TEST(Composite, MisalignedInputsThrow) {
    EXPECT_THROW(composite(may76(5), may76(6)), AlignmentError);
    EXPECT_THROW(composite(may76(5), MonthlySeries("t", {1976, 6}, std::vector<double>(5))), AlignmentError);
}

TEST(Composite, CommutativeAssociativeWithZeroIdentity) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> count(0, 500);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        auto draw = [&] {
            std::vector<double> v(n);
            for (auto& x : v) x = count(rng);
            return MonthlySeries("r", {1990, 1}, std::move(v));
        };
        const auto a = draw(), b = draw(), c = draw();
        const MonthlySeries zero("0", {1990, 1}, std::vector<double>(n, 0.0));
        const auto ab = composite(a, b), ba = composite(b, a);
        const auto left = composite(composite(a, b), c), right = composite(a, composite(b, c));
        const auto az = composite(a, zero);
        for (std::size_t i = 1; i <= n; ++i) {
            EXPECT_EQ(ab.at(i), ba.at(i));
            EXPECT_EQ(left.at(i), right.at(i));
            EXPECT_EQ(az.at(i), a.at(i));
        }
    }
}

TEST(PeriodYears, Examples) {
    EXPECT_DOUBLE_EQ(period_years(192, 438), 20.5);
    EXPECT_DOUBLE_EQ(period_years(197, 515), 26.5);
    EXPECT_EQ(period_years(42, 42), 0.0);
    EXPECT_THROW(period_years(438, 192), OrderingError);
}

TEST(PeriodYears, Additive) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t v[3] = {rng() % 1000, rng() % 1000, rng() % 1000};
        std::sort(std::begin(v), std::end(v));
        EXPECT_NEAR(period_years(v[0], v[1]) + period_years(v[1], v[2]), period_years(v[0], v[2]), 1e-12);
    }
}
