#pragma once
// File formats: ledger CSV/JSON, statistics JSON, time-series CSV and the
// side-by-side comparison table. Every number is written with 12 significant
// digits; JSON keys keep a fixed order.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "eri/analytics.hpp"
#include "eri/backtest.hpp"
#include "eri/csv.hpp"
#include "eri/weights.hpp"

namespace eri::report {

using Json = nlohmann::ordered_json;

inline Json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return csv::round_to_12(v);
}

inline Json number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

inline Json vector_json(const VectorXd& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number(v[i]));
    return arr;
}

inline std::string optional_field(const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string{}; }

/// "# provenance: {...}" comment line preceding the CSV header.
inline void write_provenance_comment(std::ostream& out, const Json& provenance) {
    if (!provenance.is_null()) out << "# provenance: " << provenance.dump() << "\r\n";
}

inline const std::vector<std::string>& ledger_csv_columns() {
    static const std::vector<std::string> cols{"date", "value", "return", "turnover", "cc", "gamma_or_objective", "alpha_hat"};
    return cols;
}

inline void write_ledger_csv(std::ostream& out, const BacktestLedger& ledger, const Json& provenance = nullptr) {
    write_provenance_comment(out, provenance);
    csv::write_row(out, ledger_csv_columns());
    for (const auto& d : ledger.days) {
        csv::write_row(out, {d.date, csv::format_number(d.portfolio_value), csv::format_number(d.period_return),
                             csv::format_number(d.turnover), csv::format_number(d.concentration),
                             optional_field(d.objective), optional_field(d.alpha_hat)});
    }
}

inline Json ledger_to_json(const BacktestLedger& ledger, const Json& provenance = nullptr) {
    Json j;
    if (!provenance.is_null()) j["provenance"] = provenance;
    j["strategy"] = ledger.strategy;
    j["tickers"] = ledger.tickers;
    j["window_len"] = ledger.window_len;
    j["rebalance_every"] = ledger.rebalance_every;
    j["initial_value"] = number(ledger.initial_value);
    Json days = Json::array();
    for (const auto& d : ledger.days) {
        Json day;
        day["date"] = d.date;
        day["period"] = d.period;
        day["value"] = number(d.portfolio_value);
        day["return"] = number(d.period_return);
        day["turnover"] = number(d.turnover);
        day["cc"] = number(d.concentration);
        day["gamma_or_objective"] = number(d.objective);
        day["alpha_hat"] = number(d.alpha_hat);
        day["k"] = d.k ? Json(*d.k) : Json(nullptr);
        day["rebalanced"] = d.rebalanced;
        day["converged"] = d.converged;
        day["fallback"] = d.fallback;
        day["note"] = d.note;
        day["weights_before"] = vector_json(d.weights_before.values());
        day["weights_after"] = vector_json(d.weights_after.values());
        days.push_back(std::move(day));
    }
    j["days"] = std::move(days);
    return j;
}

namespace detail {

inline std::optional<double> opt_number(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

inline VectorXd to_vector(const Json& arr) {
    VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

}  // namespace detail

/// Inverse of ledger_to_json (values carry the 12-digit rounding).
inline BacktestLedger ledger_from_json(const Json& j) {
    BacktestLedger ledger;
    ledger.strategy = j.at("strategy").get<std::string>();
    ledger.tickers = j.at("tickers").get<std::vector<std::string>>();
    ledger.window_len = j.at("window_len").get<std::size_t>();
    ledger.rebalance_every = j.at("rebalance_every").get<std::size_t>();
    ledger.initial_value = j.at("initial_value").get<double>();
    for (const auto& day : j.at("days")) {
        DayRecord d;
        d.date = day.at("date").get<std::string>();
        d.period = day.at("period").get<std::size_t>();
        d.portfolio_value = day.at("value").get<double>();
        d.period_return = day.at("return").get<double>();
        d.turnover = day.at("turnover").get<double>();
        d.concentration = day.at("cc").get<double>();
        d.objective = detail::opt_number(day.at("gamma_or_objective"));
        d.alpha_hat = detail::opt_number(day.at("alpha_hat"));
        if (!day.at("k").is_null()) d.k = day.at("k").get<std::size_t>();
        d.rebalanced = day.at("rebalanced").get<bool>();
        d.converged = day.at("converged").get<bool>();
        d.fallback = day.at("fallback").get<bool>();
        d.note = day.at("note").get<std::string>();
        d.weights_before = Weights(detail::to_vector(day.at("weights_before")), ledger.tickers);
        d.weights_after = Weights(detail::to_vector(day.at("weights_after")), ledger.tickers);
        ledger.days.push_back(std::move(d));
    }
    return ledger;
}

inline Json stats_to_json(const StatsReport& s, const Json& provenance = nullptr) {
    Json j;
    if (!provenance.is_null()) j["provenance"] = provenance;
    j["cumulative_return"] = number(s.cumulative_return);
    j["annualized_return"] = number(s.annualized_return);
    j["annualized_sharpe"] = number(s.annualized_sharpe);
    j["annualized_starr"] = number(s.annualized_starr);
    j["max_drawdown"] = number(s.max_drawdown);
    j["avg_concentration"] = number(s.avg_concentration);
    j["avg_turnover"] = number(s.avg_turnover);
    j["avg_first_pca_explained"] = number(s.avg_first_pca_explained);
    j["days"] = s.days;
    j["assets"] = s.assets;
    j["es_tail_count"] = s.es_tail_count;
    j["notes"] = s.notes;
    return j;
}

namespace detail {

inline std::string fmt(const std::optional<double>& v, bool percent, int decimals) {
    if (!v) return "N/A";
    char buf[64];
    if (percent) {
        std::snprintf(buf, sizeof buf, "%.*f%%", decimals, *v * 100.0);
    } else {
        std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
    }
    return buf;
}

}  // namespace detail

/// Aligned text table, one column per named report, rows in the order
/// CR, AR, AS, AST, MD, AC, AT, PCA.
inline std::string comparison_table(const std::vector<std::pair<std::string, StatsReport>>& columns) {
    struct RowSpec {
        const char* label;
        std::optional<double> StatsReport::*field;
        bool percent;
        int decimals;
    };
    static const RowSpec rows[] = {
        {"CR (Cumulative Return)", &StatsReport::cumulative_return, true, 2},
        {"AR (Annualized Return)", &StatsReport::annualized_return, true, 2},
        {"AS (Annualized Sharpe)", &StatsReport::annualized_sharpe, false, 4},
        {"AST (Annualized STARR_0.95)", &StatsReport::annualized_starr, false, 4},
        {"MD (Max Drawdown)", &StatsReport::max_drawdown, true, 2},
        {"AC (Average Concentration Coefficient)", &StatsReport::avg_concentration, false, 2},
        {"AT (Average Turnover)", &StatsReport::avg_turnover, false, 4},
        {"PCA (First PCA factor Explained Variance)", &StatsReport::avg_first_pca_explained, true, 2},
    };

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{""};
    for (const auto& [name, _] : columns) header.push_back(name);
    cells.push_back(header);
    for (const auto& r : rows) {
        std::vector<std::string> line{r.label};
        for (const auto& [_, rep] : columns) line.push_back(detail::fmt(rep.*(r.field), r.percent, r.decimals));
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    std::ostringstream out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c == 0) {
                out << line[c] << std::string(width[c] - line[c].size(), ' ');
            } else {
                out << "  " << std::string(width[c] - line[c].size(), ' ') << line[c];
            }
        }
        out << '\n';
    }
    return out.str();
}

/// Per-day diagnostics for plotting: concentration, turnover, first-PCA
/// share, tail index and objective.
inline void write_timeseries_csv(std::ostream& out, const BacktestLedger& ledger, const std::vector<double>& pca,
                                 const Json& provenance = nullptr) {
    write_provenance_comment(out, provenance);
    csv::write_row(out, {"date", "cc", "turnover", "pca_first", "alpha_hat", "gamma_or_objective", "rebalanced", "fallback"});
    for (std::size_t i = 0; i < ledger.days.size(); ++i) {
        const auto& d = ledger.days[i];
        csv::write_row(out, {d.date, csv::format_number(d.concentration), csv::format_number(d.turnover),
                             i < pca.size() ? csv::format_number(pca[i]) : std::string{}, optional_field(d.alpha_hat),
                             optional_field(d.objective), d.rebalanced ? "1" : "0", d.fallback ? "1" : "0"});
    }
}

}  // namespace eri::report
