#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "eri/report.hpp"
#include "eri/synthetic.hpp"

using namespace eri;
using report::Json;

namespace {

BacktestLedger small_ledger(StrategySpec spec) {
    SyntheticPanelSpec p;
    p.assets = 3;
    p.observations = 60;
    p.seed = 2;
    BacktestConfig c;
    c.window_len = 30;
    c.rebalance_every = 2;
    c.strategy = std::move(spec);
    return run_backtest(synthetic_panel(p), c);
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("ledger CSV layout") {
    const auto ledger = small_ledger(StrategySpec::eri());
    std::ostringstream out;
    report::write_ledger_csv(out, ledger, Json{{"run", "x"}});
    const auto ls = lines(out.str());
    REQUIRE(ls.size() == ledger.days.size() + 2);
    CHECK(ls[0] == "# provenance: {\"run\":\"x\"}\r");
    CHECK(ls[1] == "date,value,return,turnover,cc,gamma_or_objective,alpha_hat\r");
    std::istringstream body(out.str().substr(out.str().find('\n') + 1));
    const auto table = csv::read(body);
    CHECK(table.rows.size() == ledger.days.size());
    CHECK(table.rows[0][0] == ledger.days[0].date);
    CHECK(table.rows[0][1] == csv::format_number(ledger.days[0].portfolio_value));
    CHECK_FALSE(table.rows[0][6].empty());
}

TEST_CASE("EW ledger leaves ERI columns empty") {
    const auto ledger = small_ledger(StrategySpec::ew());
    std::ostringstream out;
    report::write_ledger_csv(out, ledger);
    std::istringstream in(out.str());
    const auto table = csv::read(in);
    CHECK(table.rows[0][5].empty());
    CHECK(table.rows[0][6].empty());
}

TEST_CASE("ledger JSON round trip") {
    const auto ledger = small_ledger(StrategySpec::mv());
    const Json j = report::ledger_to_json(ledger, Json{{"k", 1}});
    CHECK(j.begin().key() == "provenance");
    const auto back = report::ledger_from_json(Json::parse(j.dump()));
    REQUIRE(back.days.size() == ledger.days.size());
    CHECK(back.tickers == ledger.tickers);
    for (std::size_t d = 0; d < back.days.size(); ++d) {
        CHECK(back.days[d].portfolio_value == csv::round_to_12(ledger.days[d].portfolio_value));
        CHECK(back.days[d].weights_after.values().isApprox(ledger.days[d].weights_after.values(), 1e-11));
        CHECK(back.days[d].rebalanced == ledger.days[d].rebalanced);
    }
    CHECK(report::ledger_to_json(back).dump() == report::ledger_to_json(ledger).dump());
}

TEST_CASE("stats JSON keys are ordered") {
    StatsReport s;
    s.cumulative_return = 0.3007;
    s.avg_concentration = 444;
    const Json j = report::stats_to_json(s);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys.front() == "cumulative_return");
    CHECK(keys[1] == "annualized_return");
    CHECK(j["annualized_return"].is_null());
    CHECK(j.dump().find("0.3007") != std::string::npos);
}

TEST_CASE("comparison table rows") {
    StatsReport a;
    a.cumulative_return = 0.3007;
    a.annualized_return = 0.0676;
    a.annualized_sharpe = 0.4715;
    a.avg_concentration = 2.5;
    StatsReport b;
    const auto text = report::comparison_table({{"ERI", a}, {"EW", b}});
    const auto ls = lines(text);
    REQUIRE(ls.size() == 9);
    CHECK(ls[1].rfind("CR ", 0) == 0);
    CHECK(ls[2].rfind("AR ", 0) == 0);
    CHECK(ls[3].rfind("AS ", 0) == 0);
    CHECK(ls[4].rfind("AST ", 0) == 0);
    CHECK(ls[5].rfind("MD ", 0) == 0);
    CHECK(ls[6].rfind("AC ", 0) == 0);
    CHECK(ls[7].rfind("AT ", 0) == 0);
    CHECK(ls[8].rfind("PCA ", 0) == 0);
    CHECK(ls[1].find("30.07%") != std::string::npos);
    CHECK(ls[2].find("6.76%") != std::string::npos);
    CHECK(ls[3].find("0.4715") != std::string::npos);
    CHECK(ls[1].find("N/A") != std::string::npos);
    for (const auto& l : ls) CHECK(l.size() == ls[0].size());
}

TEST_CASE("time series CSV") {
    const auto ledger = small_ledger(StrategySpec::eri());
    const auto pca = std::vector<double>(ledger.days.size(), 0.5);
    std::ostringstream out;
    report::write_timeseries_csv(out, ledger, pca);
    std::istringstream in(out.str());
    const auto t = csv::read(in);
    CHECK(t.header == csv::Row{"date", "cc", "turnover", "pca_first", "alpha_hat", "gamma_or_objective", "rebalanced",
                               "fallback"});
    CHECK(t.rows.size() == ledger.days.size());
    CHECK(t.rows[0][3] == "0.5");
    CHECK(t.rows[1][6] == "0");
    CHECK(t.rows[2][6] == "1");
}
