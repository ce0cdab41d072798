#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "eri/backtest.hpp"
#include "eri/random.hpp"
#include "eri/synthetic.hpp"

using namespace eri;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr std::size_t kWindow = 20;

// kWindow + 1 flat warm-up prices followed by the given tail per asset.
PricePanel warm_panel(const std::vector<std::vector<double>>& tails) {
    const std::size_t extra = tails.front().size();
    MatrixXd prices(static_cast<Eigen::Index>(kWindow + 1 + extra), static_cast<Eigen::Index>(tails.size()));
    CounterRng rng(1);
    for (std::size_t c = 0; c < tails.size(); ++c) {
        for (std::size_t r = 0; r <= kWindow; ++r) prices(r, c) = 100.0 * std::exp(0.01 * rng.normal());
        prices(kWindow, c) = 100.0;
        for (std::size_t r = 0; r < extra; ++r) prices(kWindow + 1 + r, c) = tails[c][r];
    }
    std::vector<std::string> tickers;
    for (std::size_t c = 0; c < tails.size(); ++c) tickers.push_back("A" + std::to_string(c));
    return PricePanel(business_dates(static_cast<std::size_t>(prices.rows())), tickers, prices);
}

PricePanel random_panel(std::size_t dates, std::size_t assets, std::uint64_t seed) {
    SyntheticPanelSpec s;
    s.assets = assets;
    s.observations = dates - 1;
    s.seed = seed;
    s.correlation = 0.2;
    return synthetic_panel(s);
}

BacktestConfig config(StrategySpec spec, std::size_t rebalance = 1) {
    BacktestConfig c;
    c.window_len = kWindow;
    c.rebalance_every = rebalance;
    c.strategy = std::move(spec);
    return c;
}

}  // namespace

TEST_CASE("drift examples") {
    const Weights half(Eigen::Vector2d(0.5, 0.5));
    CHECK(drift_weights(half, Eigen::Vector2d(0, 0)).values() == half.values());
    // gross returns 1.1 and 0.9 correspond to relative losses 1/1.1 - 1 and 1/0.9 - 1
    const auto d = drift_weights(half, Eigen::Vector2d(1 / 1.1 - 1, 1 / 0.9 - 1));
    CHECK_THAT(d[0], WithinAbs(0.55, 1e-15));
    CHECK_THAT(d[1], WithinAbs(0.45, 1e-15));
    const Weights corner(Eigen::Vector2d(1, 0));
    CHECK(drift_weights(corner, Eigen::Vector2d(0.3, -0.4)).values() == corner.values());
}

TEST_CASE("three-day equal-weight ledger by hand") {
    const auto panel = warm_panel({{110.0, 99.0, 108.9}, {95.0, 96.9, 95.931}});
    const auto ledger = run_backtest(panel, config(StrategySpec::ew()));
    REQUIRE(ledger.days.size() == 3);

    // relative losses S(t-1)/S(t) - 1
    const double xa[3] = {100.0 / 110.0 - 1, 110.0 / 99.0 - 1, 99.0 / 108.9 - 1};
    const double xb[3] = {100.0 / 95.0 - 1, 95.0 / 96.9 - 1, 96.9 / 95.931 - 1};
    // holdings drift with the price ratio S(t)/S(t-1)
    const double ga[3] = {1.1, 0.9, 1.1};
    const double gb[3] = {0.95, 1.02, 0.99};

    double value = 100.0;
    for (int d = 0; d < 3; ++d) {
        double turnover = 0.0;
        if (d > 0) {
            const double wa = 0.5 * ga[d - 1] / (0.5 * ga[d - 1] + 0.5 * gb[d - 1]);
            turnover = std::abs(wa - 0.5) + std::abs((1 - wa) - 0.5);
        }
        const double ret = -(0.5 * xa[d] + 0.5 * xb[d]);
        value *= 1 + ret;
        const auto& rec = ledger.days[static_cast<std::size_t>(d)];
        CHECK_THAT(rec.period_return, WithinAbs(ret, 1e-12));
        CHECK_THAT(rec.portfolio_value, WithinAbs(value, 1e-12));
        CHECK_THAT(rec.turnover, WithinAbs(turnover, 1e-12));
        CHECK(rec.rebalanced);
        CHECK(rec.concentration == 2.0);
    }
    CHECK(ledger.days[0].date == panel.dates()[kWindow + 1]);
}

TEST_CASE("single asset ledger follows the asset") {
    const auto panel = warm_panel({{101.0, 97.0, 99.5, 103.0}});
    for (const auto& spec : {StrategySpec::ew(), StrategySpec::mv()}) {
        const auto ledger = run_backtest(panel, config(spec));
        double value = 100.0;
        for (std::size_t d = 0; d < ledger.days.size(); ++d) {
            const double prev = panel.prices()(static_cast<Eigen::Index>(kWindow + d), 0);
            const double cur = panel.prices()(static_cast<Eigen::Index>(kWindow + d + 1), 0);
            value *= 1 - (prev / cur - 1);
            CHECK_THAT(ledger.days[d].portfolio_value, WithinRel(value, 1e-12));
            CHECK(ledger.days[d].turnover == 0.0);
        }
    }
}

TEST_CASE("non-rebalance days carry drifted weights") {
    const auto panel = random_panel(80, 3, 5);
    const auto ledger = run_backtest(panel, config(StrategySpec::ew(), 5));
    for (std::size_t d = 0; d < ledger.days.size(); ++d) {
        const auto& rec = ledger.days[d];
        if (d % 5 != 0) {
            CHECK_FALSE(rec.rebalanced);
            CHECK(rec.turnover == 0.0);
            CHECK(rec.weights_after.values() == rec.weights_before.values());
        } else {
            CHECK(rec.rebalanced);
        }
        if (d > 0 && d % 5 == 0) CHECK(rec.turnover > 0.0);
    }
}

TEST_CASE("ledger invariants") {
    const auto panel = random_panel(70, 4, 6);
    for (const auto& spec : {StrategySpec::ew(), StrategySpec::mv(), StrategySpec::eri()}) {
        const auto ledger = run_backtest(panel, config(spec));
        const auto losses = compute_losses(panel);
        double value = ledger.initial_value;
        double product = 1.0;
        for (std::size_t d = 0; d < ledger.days.size(); ++d) {
            const auto& rec = ledger.days[d];
            CHECK_THAT(rec.portfolio_value, WithinRel(value * (1 + rec.period_return), 1e-10));
            value = rec.portfolio_value;
            product *= 1 + rec.period_return;
            CHECK_THAT(rec.turnover, WithinAbs((rec.weights_after.values() - rec.weights_before.values()).lpNorm<1>(), 1e-12));
            if (d > 0) {
                const auto drifted = drift_weights(ledger.days[d - 1].weights_after,
                                                   losses.rel_losses.row(static_cast<Eigen::Index>(rec.period - 1)).transpose());
                CHECK(drifted.values().isApprox(rec.weights_before.values(), 1e-14));
            }
        }
        CHECK_THAT(ledger.days.back().portfolio_value, WithinRel(ledger.initial_value * product, 1e-9));
    }
}

TEST_CASE("equal-weight turnover is the distance to 1/N") {
    const auto panel = random_panel(60, 3, 7);
    const auto ledger = run_backtest(panel, config(StrategySpec::ew()));
    for (std::size_t d = 1; d < ledger.days.size(); ++d) {
        const auto& b = ledger.days[d].weights_before.values();
        const double expected = (b.array() - 1.0 / 3.0).abs().sum();
        CHECK_THAT(ledger.days[d].turnover, WithinAbs(expected, 1e-14));
    }
}

TEST_CASE("identical price paths make every strategy coincide") {
    const auto base = random_panel(60, 1, 8);
    MatrixXd prices(base.num_dates(), 3);
    for (int c = 0; c < 3; ++c) prices.col(c) = base.prices().col(0);
    const PricePanel same(base.dates(), {"X", "Y", "Z"}, prices);
    const auto single = run_backtest(base, config(StrategySpec::ew())).value_path();
    for (const auto& spec : {StrategySpec::ew(), StrategySpec::mv(1e-8), StrategySpec::eri()}) {
        const auto path = run_backtest(same, config(spec)).value_path();
        REQUIRE(path.size() == single.size());
        for (std::size_t i = 0; i < path.size(); ++i) CHECK_THAT(path[i], WithinRel(single[i], 1e-9));
    }
}

TEST_CASE("common price rescaling leaves values unchanged") {
    const auto panel = random_panel(60, 3, 9);
    const PricePanel scaled(panel.dates(), panel.tickers(), 7.5 * panel.prices());
    for (const auto& spec : {StrategySpec::ew(), StrategySpec::mv(), StrategySpec::eri()}) {
        const auto a = run_backtest(panel, config(spec)).value_path();
        const auto b = run_backtest(scaled, config(spec)).value_path();
        for (std::size_t i = 0; i < a.size(); ++i) CHECK_THAT(b[i], WithinRel(a[i], 1e-9));
    }
}

TEST_CASE("window uses strictly prior losses") {
    const auto panel = random_panel(50, 3, 10);
    const auto losses = compute_losses(panel);
    const auto ledger = run_backtest(panel, config(StrategySpec::mv()));
    const auto& rec = ledger.days[4];
    const auto window = losses.log_losses.middleRows(static_cast<Eigen::Index>(rec.period - kWindow), kWindow);
    const auto alloc = target_weights(StrategySpec::mv(), window, losses.tickers);
    CHECK(alloc.weights.values() == rec.weights_after.values());
    CHECK(rec.date == losses.dates[rec.period]);
}

TEST_CASE("strategy failure falls back to drifted weights") {
    // identical rows make the tail degenerate, so ERI cannot estimate
    MatrixXd losses = MatrixXd::Constant(30, 2, 0.001);
    losses(25, 0) = 0.002;
    const auto panel = panel_from_log_losses(losses);
    const auto ledger = run_backtest(panel, config(StrategySpec::eri()));
    REQUIRE(ledger.days.size() == 10);
    CHECK(ledger.days[0].fallback);
    CHECK(ledger.days[0].weights_after.values().isApprox(Weights::equal(2).values()));
    CHECK_FALSE(ledger.days[0].note.empty());
    for (std::size_t d = 1; d < ledger.days.size(); ++d) {
        if (ledger.days[d].fallback) {
            CHECK(ledger.days[d].turnover == 0.0);
            CHECK(ledger.days[d].weights_after.values() == ledger.days[d].weights_before.values());
        }
    }
}

TEST_CASE("backtest argument checks") {
    // 20 return periods fill the window and leave no backtest day
    CHECK_THROWS_AS(run_backtest(random_panel(kWindow + 1, 2, 11), config(StrategySpec::ew())), Error);
    CHECK(run_backtest(random_panel(kWindow + 2, 2, 11), config(StrategySpec::ew())).days.size() == 1);
    BacktestConfig c = config(StrategySpec::ew());
    c.window_len = 10;
    CHECK_THROWS_AS(run_backtest(random_panel(60, 2, 1), c), Error);
    c = config(StrategySpec::ew(), 0);
    CHECK_THROWS_AS(run_backtest(random_panel(60, 2, 1), c), Error);
    c = config(StrategySpec::ew());
    c.universe = {"S2"};
    const auto ledger = run_backtest(random_panel(60, 2, 1), c);
    CHECK(ledger.tickers == std::vector<std::string>{"S2"});
}
