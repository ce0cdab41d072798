#pragma once
// Price panels, loss series and portfolio returns.
//
// Prices are taken to be adjusted closes. Dates are ordered labels in
// ISO-8601 calendar form (YYYY-MM-DD); no calendar arithmetic is done on them.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eri/csv.hpp"
#include "eri/error.hpp"
#include "eri/weights.hpp"

namespace eri {

/// Validates an ISO-8601 calendar date and returns it unchanged.
inline std::string parse_iso_date(std::string_view text) {
    std::string s(text);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    auto digits = [&](std::size_t pos, std::size_t len) {
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return false;
        }
        return true;
    };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !digits(0, 4) || !digits(5, 2) || !digits(8, 2)) {
        fail(ErrorCode::UnparseableDate, "'" + s + "' is not an ISO-8601 date (YYYY-MM-DD)");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{std::stoi(s.substr(0, 4))},
                                          std::chrono::month{static_cast<unsigned>(std::stoi(s.substr(5, 2)))},
                                          std::chrono::day{static_cast<unsigned>(std::stoi(s.substr(8, 2)))}};
    if (!ymd.ok()) fail(ErrorCode::UnparseableDate, "'" + s + "' is not a valid calendar date");
    return s;
}

/// Rectangular, date-sorted matrix of strictly positive prices
/// (rows = dates, columns = assets).
class PricePanel {
public:
    PricePanel(std::vector<std::string> dates, std::vector<std::string> tickers, MatrixXd prices)
        : dates_(std::move(dates)), tickers_(std::move(tickers)), prices_(std::move(prices)) {
        if (dates_.empty() || tickers_.empty()) fail(ErrorCode::EmptyInput, "price panel has no cells");
        if (prices_.rows() != static_cast<Eigen::Index>(dates_.size()) ||
            prices_.cols() != static_cast<Eigen::Index>(tickers_.size())) {
            fail(ErrorCode::DimensionMismatch, "price matrix shape does not match dates x tickers");
        }
        for (std::size_t i = 1; i < dates_.size(); ++i) {
            if (!(dates_[i - 1] < dates_[i])) {
                fail(ErrorCode::DuplicateEntry, "dates not strictly increasing at " + dates_[i]);
            }
        }
        std::set<std::string> seen;
        for (const auto& t : tickers_) {
            if (!seen.insert(t).second) fail(ErrorCode::DuplicateEntry, "duplicate ticker " + t);
        }
        for (Eigen::Index r = 0; r < prices_.rows(); ++r) {
            for (Eigen::Index c = 0; c < prices_.cols(); ++c) {
                const double p = prices_(r, c);
                if (!std::isfinite(p) || p <= 0.0) {
                    fail(ErrorCode::NonPositivePrice, tickers_[static_cast<std::size_t>(c)] + " on " +
                                                          dates_[static_cast<std::size_t>(r)] + " has price " +
                                                          std::to_string(p));
                }
            }
        }
    }

    [[nodiscard]] const std::vector<std::string>& dates() const noexcept { return dates_; }
    [[nodiscard]] const std::vector<std::string>& tickers() const noexcept { return tickers_; }
    [[nodiscard]] const MatrixXd& prices() const noexcept { return prices_; }
    [[nodiscard]] std::size_t num_dates() const noexcept { return dates_.size(); }
    [[nodiscard]] std::size_t num_assets() const noexcept { return tickers_.size(); }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view ticker) const {
        const auto it = std::find(tickers_.begin(), tickers_.end(), ticker);
        if (it == tickers_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - tickers_.begin());
    }

    /// Sub-panel over the given tickers, in the order given.
    [[nodiscard]] PricePanel select(const std::vector<std::string>& tickers) const {
        MatrixXd sub(prices_.rows(), static_cast<Eigen::Index>(tickers.size()));
        for (std::size_t j = 0; j < tickers.size(); ++j) {
            const auto idx = index_of(tickers[j]);
            if (!idx) fail(ErrorCode::UnknownTicker, "ticker " + tickers[j] + " not in panel");
            sub.col(static_cast<Eigen::Index>(j)) = prices_.col(static_cast<Eigen::Index>(*idx));
        }
        return PricePanel(dates_, tickers, std::move(sub));
    }

private:
    std::vector<std::string> dates_;
    std::vector<std::string> tickers_;
    MatrixXd prices_;
};

enum class CsvLayout { Auto, Wide, Long };
enum class MissingPolicy { Error, DropAsset };

/// Column mapping for load_prices. Column names compare case-insensitively.
struct CsvSchema {
    CsvLayout layout = CsvLayout::Auto;
    std::string date_column = "date";
    std::string ticker_column = "ticker";
    std::string price_column = "price";
    MissingPolicy missing = MissingPolicy::Error;
};

struct LoadResult {
    PricePanel panel;
    std::vector<std::string> dropped;  // assets removed for lacking full history
};

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
    while (!out.empty() && (out.front() == ' ' || out.front() == '\t')) out.erase(out.begin());
    return out;
}

inline bool is_missing(std::string_view field) {
    const auto l = lower(field);
    return l.empty() || l == "na" || l == "nan" || l == "null";
}

inline std::optional<std::size_t> find_column(const csv::Row& header, std::string_view name) {
    const auto target = lower(name);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (lower(header[i]) == target) return i;
    }
    return std::nullopt;
}

inline double parse_price(std::string_view field, const std::string& ticker, const std::string& date) {
    const double p = csv::parse_number(field, ticker + " on " + date);
    if (!std::isfinite(p) || p <= 0.0) {
        fail(ErrorCode::NonPositivePrice, ticker + " on " + date + " has price " + std::string(field));
    }
    return p;
}

// Cells keyed by (date, ticker) gathered from either layout.
struct Cells {
    std::vector<std::string> tickers;  // first-appearance order
    std::map<std::string, std::unordered_map<std::string, double>> by_date;
};

inline LoadResult assemble(Cells cells, MissingPolicy policy) {
    if (cells.by_date.empty() || cells.tickers.empty()) fail(ErrorCode::EmptyInput, "no price rows found");
    std::vector<std::string> kept;
    std::vector<std::string> dropped;
    for (const auto& ticker : cells.tickers) {
        std::optional<std::string> missing_date;
        for (const auto& [date, row] : cells.by_date) {
            if (!row.contains(ticker)) {
                missing_date = date;
                break;
            }
        }
        if (!missing_date) {
            kept.push_back(ticker);
        } else if (policy == MissingPolicy::Error) {
            fail(ErrorCode::MissingCell, "ticker " + ticker + " has no price on " + *missing_date);
        } else {
            dropped.push_back(ticker);
        }
    }
    if (kept.empty()) fail(ErrorCode::EmptyInput, "no asset has a full price history");

    std::vector<std::string> dates;
    dates.reserve(cells.by_date.size());
    MatrixXd prices(static_cast<Eigen::Index>(cells.by_date.size()), static_cast<Eigen::Index>(kept.size()));
    Eigen::Index r = 0;
    for (const auto& [date, row] : cells.by_date) {
        dates.push_back(date);
        for (std::size_t c = 0; c < kept.size(); ++c) prices(r, static_cast<Eigen::Index>(c)) = row.at(kept[c]);
        ++r;
    }
    return LoadResult{PricePanel(std::move(dates), std::move(kept), std::move(prices)), std::move(dropped)};
}

}  // namespace detail

/// Reads a wide (date, TICKER1, TICKER2, ...) or long (date, ticker, price)
/// CSV. Auto layout picks long when the header holds exactly the three
/// schema columns. Rows may come in any date order; long-layout tickers are
/// ordered by name so the panel does not depend on row order.
inline LoadResult load_prices_with_report(std::istream& source, const CsvSchema& schema = {}) {
    const csv::Table table = csv::read(source);
    if (table.header.empty() || table.rows.empty()) fail(ErrorCode::EmptyInput, "CSV has no data rows");

    const auto date_col = detail::find_column(table.header, schema.date_column);
    const auto ticker_col = detail::find_column(table.header, schema.ticker_column);
    const auto price_col = detail::find_column(table.header, schema.price_column);

    CsvLayout layout = schema.layout;
    if (layout == CsvLayout::Auto) {
        layout = (table.header.size() == 3 && date_col && ticker_col && price_col) ? CsvLayout::Long : CsvLayout::Wide;
    }

    detail::Cells cells;
    if (layout == CsvLayout::Long) {
        if (!date_col || !ticker_col || !price_col) {
            fail(ErrorCode::MalformedCsv, "long layout needs columns " + schema.date_column + ", " +
                                              schema.ticker_column + ", " + schema.price_column);
        }
        std::set<std::string> known;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            if (row.size() != table.header.size()) {
                fail(ErrorCode::MalformedCsv, "line " + std::to_string(table.lines[i]) + " has " +
                                                  std::to_string(row.size()) + " fields, expected " +
                                                  std::to_string(table.header.size()));
            }
            const std::string date = parse_iso_date(row[*date_col]);
            const std::string& ticker = row[*ticker_col];
            if (detail::is_missing(row[*price_col])) continue;
            const double price = detail::parse_price(row[*price_col], ticker, date);
            known.insert(ticker);
            if (!cells.by_date[date].emplace(ticker, price).second) {
                fail(ErrorCode::DuplicateEntry, "ticker " + ticker + " appears twice on " + date);
            }
        }
        cells.tickers.assign(known.begin(), known.end());
    } else {
        const std::size_t dcol = date_col.value_or(0);
        std::vector<std::size_t> columns;
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == dcol) continue;
            columns.push_back(c);
            cells.tickers.push_back(table.header[c]);
        }
        {
            std::set<std::string> uniq(cells.tickers.begin(), cells.tickers.end());
            if (uniq.size() != cells.tickers.size()) fail(ErrorCode::DuplicateEntry, "duplicate ticker column");
        }
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            if (row.size() != table.header.size()) {
                fail(ErrorCode::MalformedCsv, "line " + std::to_string(table.lines[i]) + " has " +
                                                  std::to_string(row.size()) + " fields, expected " +
                                                  std::to_string(table.header.size()));
            }
            const std::string date = parse_iso_date(row[dcol]);
            if (cells.by_date.contains(date)) fail(ErrorCode::DuplicateEntry, "date " + date + " appears twice");
            auto& slot = cells.by_date[date];
            for (std::size_t j = 0; j < columns.size(); ++j) {
                const auto& field = row[columns[j]];
                if (detail::is_missing(field)) continue;
                slot.emplace(cells.tickers[j], detail::parse_price(field, cells.tickers[j], date));
            }
        }
    }
    return detail::assemble(std::move(cells), schema.missing);
}

inline PricePanel load_prices(std::istream& source, const CsvSchema& schema = {}) {
    return load_prices_with_report(source, schema).panel;
}

/// Writes a panel in the wide layout (date column first).
inline void write_prices(std::ostream& out, const PricePanel& panel) {
    csv::Row header{"date"};
    header.insert(header.end(), panel.tickers().begin(), panel.tickers().end());
    csv::write_row(out, header);
    for (std::size_t r = 0; r < panel.num_dates(); ++r) {
        csv::Row row{panel.dates()[r]};
        for (std::size_t c = 0; c < panel.num_assets(); ++c) {
            row.push_back(csv::format_number(panel.prices()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
        }
        csv::write_row(out, row);
    }
}

/// Per-period losses. Row t holds the move from date t to date t+1 of the
/// source panel and is labelled with the later date.
struct LossMatrix {
    MatrixXd log_losses;  // X_i(t) = log S_i(t-1) - log S_i(t)
    MatrixXd rel_losses;  // X~_i(t) = S_i(t-1)/S_i(t) - 1
    std::vector<std::string> dates;
    std::vector<std::string> tickers;

    [[nodiscard]] std::size_t num_periods() const noexcept { return dates.size(); }
    [[nodiscard]] std::size_t num_assets() const noexcept { return tickers.size(); }
};

inline LossMatrix compute_losses(const PricePanel& panel) {
    if (panel.num_dates() < 2) fail(ErrorCode::TooFewDates, "need at least two dates to form losses");
    const auto& p = panel.prices();
    const Eigen::Index periods = p.rows() - 1;
    LossMatrix out;
    out.log_losses.resize(periods, p.cols());
    out.rel_losses.resize(periods, p.cols());
    for (Eigen::Index t = 0; t < periods; ++t) {
        for (Eigen::Index i = 0; i < p.cols(); ++i) {
            const double prev = p(t, i);
            const double cur = p(t + 1, i);
            out.log_losses(t, i) = std::log(prev) - std::log(cur);
            out.rel_losses(t, i) = prev / cur - 1.0;
        }
    }
    out.dates.assign(panel.dates().begin() + 1, panel.dates().end());
    out.tickers = panel.tickers();
    return out;
}

/// Relative portfolio gain for one period, -(w^T X~).
inline double portfolio_relative_return(const Weights& w, const Eigen::Ref<const VectorXd>& rel_loss_row) {
    if (static_cast<Eigen::Index>(w.size()) != rel_loss_row.size()) {
        fail(ErrorCode::DimensionMismatch, "weights have " + std::to_string(w.size()) + " entries, loss row " +
                                               std::to_string(rel_loss_row.size()));
    }
    return -w.values().dot(rel_loss_row);
}

}  // namespace eri
