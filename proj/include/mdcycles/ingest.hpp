#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdcycles/error.hpp"
#include "mdcycles/series.hpp"
#include "mdcycles/year_month.hpp"

namespace mdcycles {

struct CalendarDate {
    int year = 0;
    int month = 0;
    int day = 0;

    YearMonth year_month() const { return {year, month}; }
    auto operator<=>(const CalendarDate&) const = default;
};

/// Accepted date layouts, tried in declaration order.
enum class DateFormat { MonthDayYear4, IsoDash, Compact, MonthDayYear2 };

inline std::string_view to_string(DateFormat f) {
    switch (f) {
        case DateFormat::MonthDayYear4: return "MM/DD/YYYY";
        case DateFormat::IsoDash: return "YYYY-MM-DD";
        case DateFormat::Compact: return "YYYYMMDD";
        case DateFormat::MonthDayYear2: return "M/D/YY";
    }
    return "?";
}

struct ParsedDate {
    CalendarDate date;
    DateFormat format;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

inline std::optional<int> to_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline bool valid_ymd(int y, int m, int d) {
    static constexpr std::array<int, 12> days{31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12 || d < 1 || d > days[m - 1]) return false;
    if (m == 2 && d == 29) return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return true;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

inline std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

inline std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace detail

/// Parses one date cell. A trailing time-of-day after a space is ignored.
/// Returns nullopt for blank or unrecognised cells.
inline std::optional<ParsedDate> parse_date(std::string_view text) {
    text = detail::trim(text);
    if (auto sp = text.find(' '); sp != std::string_view::npos) text = text.substr(0, sp);
    if (text.empty()) return std::nullopt;

    auto make = [](int y, int m, int d, DateFormat f) -> std::optional<ParsedDate> {
        if (!detail::valid_ymd(y, m, d)) return std::nullopt;
        return ParsedDate{{y, m, d}, f};
    };

    if (auto parts = detail::split(text, '/'); parts.size() == 3) {
        if (!detail::all_digits(parts[0]) || !detail::all_digits(parts[1]) || !detail::all_digits(parts[2]) ||
            parts[0].size() > 2 || parts[1].size() > 2) {
            return std::nullopt;
        }
        int m = *detail::to_int(parts[0]);
        int d = *detail::to_int(parts[1]);
        int y = *detail::to_int(parts[2]);
        if (parts[2].size() == 4) return make(y, m, d, DateFormat::MonthDayYear4);
        if (parts[2].size() == 2) return make(y < 50 ? 2000 + y : 1900 + y, m, d, DateFormat::MonthDayYear2);
        return std::nullopt;
    }
    if (auto parts = detail::split(text, '-'); parts.size() == 3) {
        if (parts[0].size() != 4 || parts[1].size() != 2 || parts[2].size() != 2) return std::nullopt;
        auto y = detail::to_int(parts[0]), m = detail::to_int(parts[1]), d = detail::to_int(parts[2]);
        if (!y || !m || !d) return std::nullopt;
        return make(*y, *m, *d, DateFormat::IsoDash);
    }
    if (text.size() == 8 && detail::all_digits(text)) {
        return make(*detail::to_int(text.substr(0, 4)), *detail::to_int(text.substr(4, 2)),
                    *detail::to_int(text.substr(6, 2)), DateFormat::Compact);
    }
    return std::nullopt;
}

enum class RecordKind { PMN, PMA };

inline std::string_view to_string(RecordKind k) { return k == RecordKind::PMN ? "PMN" : "PMA"; }

struct FdaRecord {
    std::string record_id;
    std::optional<CalendarDate> date_received;
    std::optional<CalendarDate> decision_date;
    RecordKind kind = RecordKind::PMN;
};

struct ParseDiagnostics {
    std::size_t rows_read = 0;
    std::size_t kept = 0;
    std::size_t rejected = 0;
    std::size_t unparseable_dates = 0;
    char delimiter = '|';
    std::set<std::string> date_formats;
    /// record ids seen more than once, each listed once, in first-repeat order
    std::vector<std::string> duplicate_ids;
};

struct ParseResult {
    std::vector<FdaRecord> records;
    ParseDiagnostics diagnostics;
};

/// Reads an FDA 510(k)/PMA download table. The delimiter is taken from the
/// header row: '|' if present, else tab, else ','. Rows without an id or
/// without any parseable date are rejected.
inline ParseResult parse_fda_file(std::istream& in, RecordKind kind) {
    auto lines = detail::read_lines(in);
    auto first = std::find_if(lines.begin(), lines.end(), [](const std::string& l) { return !detail::trim(l).empty(); });
    if (first == lines.end()) throw SchemaError("empty input: no header row");

    std::string_view header = *first;
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
    char delim = header.find('|') != std::string_view::npos    ? '|'
                 : header.find('\t') != std::string_view::npos ? '\t'
                                                               : ',';

    auto columns = detail::split(header, delim);
    std::optional<std::size_t> received_col, decision_col, id_col;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        auto name = detail::upper(detail::trim(columns[c]));
        if (name == "DATERECEIVED") received_col = c;
        else if (name == "DECISIONDATE") decision_col = c;
        else if (name == "KNUMBER" || name == "PMANUMBER") id_col = id_col.value_or(c);
    }
    if (!received_col && !decision_col) {
        throw SchemaError("header has neither DATERECEIVED nor DECISIONDATE column");
    }
    if (!id_col) id_col = 0;

    ParseResult result;
    auto& diag = result.diagnostics;
    diag.delimiter = delim;
    std::map<std::string, int> seen;

    auto cell = [](const std::vector<std::string_view>& cells, std::optional<std::size_t> col) -> std::string_view {
        if (!col || *col >= cells.size()) return {};
        return detail::trim(cells[*col]);
    };
    auto read_date = [&](std::string_view text) -> std::optional<CalendarDate> {
        if (text.empty()) return std::nullopt;
        auto parsed = parse_date(text);
        if (!parsed) {
            ++diag.unparseable_dates;
            return std::nullopt;
        }
        diag.date_formats.insert(std::string(to_string(parsed->format)));
        return parsed->date;
    };

    for (auto it = std::next(first); it != lines.end(); ++it) {
        if (detail::trim(*it).empty()) continue;
        ++diag.rows_read;
        auto cells = detail::split(*it, delim);
        FdaRecord rec;
        rec.kind = kind;
        rec.record_id = std::string(cell(cells, id_col));
        rec.date_received = read_date(cell(cells, received_col));
        rec.decision_date = read_date(cell(cells, decision_col));
        if (rec.record_id.empty() || (!rec.date_received && !rec.decision_date)) {
            ++diag.rejected;
            continue;
        }
        if (++seen[rec.record_id] == 2) diag.duplicate_ids.push_back(rec.record_id);
        result.records.push_back(std::move(rec));
        ++diag.kept;
    }
    return result;
}

inline ParseResult parse_fda_file(std::string_view content, RecordKind kind) {
    std::istringstream in{std::string(content)};
    return parse_fda_file(in, kind);
}

enum class DateField { Received, Decision };

struct MonthlyCounts {
    MonthlySeries series;
    std::size_t out_of_range = 0;
    std::size_t missing_date = 0;
};

/// Number of records whose selected date falls in each month of [first, last].
inline MonthlyCounts count_monthly(std::span<const FdaRecord> records, DateField which, YearMonth first,
                                   YearMonth last, std::string label = "count") {
    if (last < first) throw RangeError("empty month range " + first.str() + ".." + last.str());
    std::vector<double> counts(static_cast<std::size_t>(last.months_since(first)) + 1, 0.0);
    std::size_t out_of_range = 0, missing = 0;
    for (const auto& r : records) {
        const auto& date = which == DateField::Received ? r.date_received : r.decision_date;
        if (!date) {
            ++missing;
            continue;
        }
        auto ym = date->year_month();
        if (ym < first || last < ym) {
            ++out_of_range;
            continue;
        }
        counts[static_cast<std::size_t>(ym.months_since(first))] += 1.0;
    }
    return {MonthlySeries(std::move(label), first, std::move(counts)), out_of_range, missing};
}

/// The six monthly columns of the bundled table, in file order.
inline constexpr std::array<std::string_view, 6> kCanonicalLabels{"X510kr", "X510kc",     "PMAr",
                                                                  "PMAa",   "X510krPMAr", "X510kcPMAa"};

inline constexpr YearMonth kDefaultStart{1976, 5};

class CountsTable {
public:
    /// `columns` in kCanonicalLabels order. Throws IntegrityError when a
    /// composite column is not the sum of its parts.
    CountsTable(YearMonth start, std::array<std::vector<double>, 6> columns) : start_(start) {
        const auto n = columns[0].size();
        for (std::size_t c = 0; c < 6; ++c) {
            if (columns[c].size() != n) throw AlignmentError("counts columns differ in length");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (columns[0][i] + columns[2][i] != columns[4][i] || columns[1][i] + columns[3][i] != columns[5][i]) {
                throw IntegrityError("composite identity violated at row " + std::to_string(i + 1));
            }
        }
        for (std::size_t c = 0; c < 6; ++c) {
            series_.emplace_back(std::string(kCanonicalLabels[c]), start, std::move(columns[c]));
        }
    }

    /// Builds the table from PMN/PMA counts; composites are derived.
    static CountsTable from_parts(const MonthlySeries& pmn_received, const MonthlySeries& pmn_decision,
                                  const MonthlySeries& pma_received, const MonthlySeries& pma_decision) {
        auto app = composite(pmn_received, pma_received);
        auto reg = composite(pmn_decision, pma_decision);
        auto vec = [](const MonthlySeries& s) { return std::vector<double>(s.values().begin(), s.values().end()); };
        if (pmn_received.start() != pmn_decision.start() || pmn_received.size() != pmn_decision.size()) {
            throw AlignmentError("received and decision counts are not aligned");
        }
        return CountsTable(pmn_received.start(), {vec(pmn_received), vec(pmn_decision), vec(pma_received),
                                                  vec(pma_decision), vec(app), vec(reg)});
    }

    YearMonth start() const noexcept { return start_; }
    std::size_t rows() const noexcept { return series_.front().size(); }
    const std::vector<MonthlySeries>& columns() const noexcept { return series_; }

    const MonthlySeries& column(std::string_view label) const {
        for (const auto& s : series_) {
            if (s.label() == label) return s;
        }
        throw ConfigError("no column '" + std::string(label) + "' in counts table");
    }

    /// Six values of a 1-based row.
    std::array<double, 6> row(std::size_t index) const {
        std::array<double, 6> out{};
        for (std::size_t c = 0; c < 6; ++c) out[c] = series_[c].at(index);
        return out;
    }

private:
    YearMonth start_;
    std::vector<MonthlySeries> series_;
};

namespace detail {

/// Minimal CSV row split: commas outside double quotes separate cells.
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        else if (c == ',' && !quoted) out.emplace_back();
        else out.back() += c;
    }
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    auto lines = read_lines(in);
    bool have_header = false;
    for (auto& line : lines) {
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        for (auto& c : cells) c = std::string(trim(c));
        if (!have_header) {
            if (!cells.empty() && cells[0].size() >= 3 && cells[0].substr(0, 3) == "\xEF\xBB\xBF")
                cells[0].erase(0, 3);
            t.header = std::move(cells);
            have_header = true;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw SchemaError("empty input: no header row");
    return t;
}

inline std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

/// Start month of a table: taken from a `date` column when present
/// (checked to be consecutive), else `fallback`.
inline YearMonth table_start(const CsvTable& t, YearMonth fallback) {
    auto date_col = find_column(t.header, "date");
    if (!date_col || t.rows.empty()) return fallback;
    YearMonth start{};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (*date_col >= t.rows[r].size()) throw ParseError("row " + std::to_string(r + 1) + ": missing date");
        auto ym = YearMonth::parse(t.rows[r][*date_col]);
        if (r == 0) start = ym;
        else if (ym != start.plus_months(static_cast<long long>(r)))
            throw ParseError("row " + std::to_string(r + 1) + ": date " + ym.str() + " breaks monthly sequence");
    }
    return start;
}

inline double parse_count(const std::string& cell, std::size_t row, std::string_view column) {
    auto v = to_int(cell);
    if (!v || *v < 0) {
        throw ParseError("row " + std::to_string(row) + ", column " + std::string(column) + ": '" + cell +
                         "' is not a non-negative integer count");
    }
    return static_cast<double>(*v);
}

} // namespace detail

/// Loads the six-column counts table. A leading row-number column or a
/// `date` column (YYYY-MM) is tolerated; without dates the table starts at
/// `start`.
inline CountsTable load_counts_table(std::istream& in, YearMonth start = kDefaultStart) {
    auto t = detail::read_csv(in);
    std::array<std::size_t, 6> idx{};
    for (std::size_t c = 0; c < 6; ++c) {
        auto col = detail::find_column(t.header, kCanonicalLabels[c]);
        if (!col) throw SchemaError("counts header lacks column " + std::string(kCanonicalLabels[c]));
        idx[c] = *col;
    }
    if (t.rows.empty()) throw SchemaError("counts table has no data rows");
    start = detail::table_start(t, start);
    std::array<std::vector<double>, 6> cols;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t c = 0; c < 6; ++c) {
            if (idx[c] >= t.rows[r].size()) {
                throw ParseError("row " + std::to_string(r + 1) + ": missing column " + std::string(kCanonicalLabels[c]));
            }
            cols[c].push_back(detail::parse_count(t.rows[r][idx[c]], r + 1, kCanonicalLabels[c]));
        }
    }
    return CountsTable(start, std::move(cols));
}

inline CountsTable load_counts_table(std::string_view content, YearMonth start = kDefaultStart) {
    std::istringstream in{std::string(content)};
    return load_counts_table(in, start);
}

/// Reads one numeric column from any monthly CSV (counts table, ingest
/// output, or decomposition export).
inline MonthlySeries load_series_column(std::istream& in, std::string_view label, YearMonth start = kDefaultStart) {
    auto t = detail::read_csv(in);
    auto col = detail::find_column(t.header, label);
    if (!col) throw ConfigError("column '" + std::string(label) + "' not found in input header");
    if (t.rows.empty()) throw SchemaError("input has no data rows");
    start = detail::table_start(t, start);
    std::vector<double> values;
    values.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string cell = *col < t.rows[r].size() ? t.rows[r][*col] : std::string{};
        double v = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
            throw ParseError("row " + std::to_string(r + 1) + ", column " + std::string(label) + ": '" + cell +
                             "' is not a number");
        }
        values.push_back(v);
    }
    return {std::string(label), start, std::move(values)};
}

/// Writes `date,<labels...>` with integer counts, one row per month.
inline void write_counts_csv(std::ostream& out, std::span<const MonthlySeries> columns) {
    if (columns.empty()) throw SchemaError("no columns to write");
    for (const auto& c : columns) {
        if (c.start() != columns.front().start() || c.size() != columns.front().size())
            throw AlignmentError("column '" + c.label() + "' is not aligned with '" + columns.front().label() + "'");
    }
    out << "date";
    for (const auto& c : columns) out << ',' << c.label();
    out << '\n';
    for (std::size_t i = 1; i <= columns.front().size(); ++i) {
        out << columns.front().date_at(i).str();
        for (const auto& c : columns) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.0f", c.at(i));
            out << ',' << buf;
        }
        out << '\n';
    }
}

inline void write_counts_csv(std::ostream& out, const CountsTable& table) {
    write_counts_csv(out, std::span<const MonthlySeries>(table.columns()));
}

} // namespace mdcycles
