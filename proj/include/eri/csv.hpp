#pragma once
// Minimal RFC-4180 reading/writing plus the fixed decimal formatting used by
// every exported file.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "eri/error.hpp"

namespace eri::csv {

using Row = std::vector<std::string>;

struct Table {
    Row header;
    std::vector<Row> rows;
    std::vector<std::size_t> lines;  // 1-based source line of each row
};

/// Parses a whole stream. Quoted fields may contain commas, doubled quotes
/// and line breaks. Blank lines are skipped; a UTF-8 BOM is tolerated.
inline Table read(std::istream& in) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);

    Table table;
    Row row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t row_line = 1;

    auto end_row = [&] {
        if (field_started || !field.empty() || !row.empty()) {
            row.push_back(std::move(field));
            if (table.header.empty() && table.rows.empty()) {
                table.header = std::move(row);
            } else {
                table.rows.push_back(std::move(row));
                table.lines.push_back(row_line);
            }
        }
        row.clear();
        field.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) {
                    fail(ErrorCode::MalformedCsv,
                         "stray quote inside unquoted field at line " + std::to_string(line));
                }
                quoted = true;
                field_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_started = true;
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                ++line;
                row_line = line;
                break;
            default:
                if (!field_started && field.empty() && row.empty()) row_line = line;
                field.push_back(c);
                break;
        }
    }
    if (quoted) fail(ErrorCode::MalformedCsv, "unterminated quoted field");
    end_row();
    return table;
}

inline bool needs_quoting(std::string_view field) {
    return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view field) {
    if (!needs_quoting(field)) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

/// Writes one record terminated by CRLF.
inline void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        write_field(out, row[i]);
    }
    out << "\r\n";
}

/// 12 significant digits, "%.12g". Non-finite values become an empty field.
inline std::string format_number(double value) {
    if (!std::isfinite(value)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

/// The double nearest to the 12-significant-digit rendering of value.
inline double round_to_12(double value) {
    if (!std::isfinite(value)) return value;
    return std::strtod(format_number(value).c_str(), nullptr);
}

inline double parse_number(std::string_view field, std::string_view context) {
    std::string s(field);
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    if (first == std::string::npos) {
        fail(ErrorCode::UnparseableNumber, "empty numeric field (" + std::string(context) + ")");
    }
    s = s.substr(first, last - first + 1);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        fail(ErrorCode::UnparseableNumber,
             "cannot parse '" + s + "' as a number (" + std::string(context) + ")");
    }
    return v;
}

}  // namespace eri::csv
