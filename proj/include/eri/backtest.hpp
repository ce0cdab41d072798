#pragma once
// Rolling-window backtest.
//
// Loss row t of the panel is the move into date t+1. On backtest day t the
// strategy sees the window_len log-loss rows t-window_len .. t-1, the weights
// it sets are held through day t, and day t's relative losses are then
// applied. Between rebalances the held weights drift with prices; the window
// advances every day regardless of the rebalance cadence.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eri/error.hpp"
#include "eri/market_data.hpp"
#include "eri/strategies.hpp"
#include "eri/weights.hpp"

namespace eri {

struct BacktestConfig {
    std::size_t window_len = 1500;
    std::size_t rebalance_every = 1;       // trading rows between rebalances
    std::vector<std::string> universe;     // empty: every asset in the panel
    StrategySpec strategy = StrategySpec::ew();
    double initial_value = 100.0;

    void validate() const {
        if (window_len < kMinTailWindow) {
            fail(ErrorCode::InvalidConfig, "window_len must be at least " + std::to_string(kMinTailWindow));
        }
        if (rebalance_every < 1) fail(ErrorCode::InvalidConfig, "rebalance_every must be at least 1");
        if (!(initial_value > 0.0)) fail(ErrorCode::InvalidConfig, "initial_value must be positive");
        strategy.validate();
    }
};

struct DayRecord {
    std::string date;
    std::size_t period = 0;            // loss-row index in the universe's LossMatrix
    Weights weights_before;            // drifted holdings before any trade
    Weights weights_after;             // holdings during the day
    double portfolio_value = 0.0;      // after the day's return
    double period_return = 0.0;
    double turnover = 0.0;
    double concentration = 0.0;        // inverse Herfindahl of weights_after
    bool rebalanced = false;
    bool fallback = false;             // strategy failed; drifted weights carried
    bool converged = true;
    std::optional<double> objective;   // gamma-hat (ERI) or variance (MV)
    std::optional<double> alpha_hat;
    std::optional<std::size_t> k;
    std::string note;
};

struct BacktestLedger {
    std::string strategy;
    std::vector<std::string> tickers;
    std::size_t window_len = 0;
    std::size_t rebalance_every = 1;
    double initial_value = 100.0;
    std::vector<DayRecord> days;

    /// initial_value followed by the value after each day.
    [[nodiscard]] std::vector<double> value_path() const {
        std::vector<double> path{initial_value};
        for (const auto& d : days) path.push_back(d.portfolio_value);
        return path;
    }

    [[nodiscard]] std::vector<double> returns() const {
        std::vector<double> r;
        r.reserve(days.size());
        for (const auto& d : days) r.push_back(d.period_return);
        return r;
    }
};

/// Inverse Herfindahl index, evaluated as (sum w)^2 / sum w^2 in extended
/// precision so that equal weights over N assets give exactly N.
inline double concentration_coefficient(const Weights& w) {
    // Neumaier-compensated sums
    long double sum = 0.0L, sum_c = 0.0L, squares = 0.0L, squares_c = 0.0L;
    auto add = [](long double& acc, long double& comp, long double x) {
        const long double t = acc + x;
        comp += std::fabs(acc) >= std::fabs(x) ? (acc - t) + x : (x - t) + acc;
        acc = t;
    };
    for (Eigen::Index i = 0; i < w.values().size(); ++i) {
        const long double v = w.values()[i];
        add(sum, sum_c, v);
        add(squares, squares_c, v * v);
    }
    sum += sum_c;
    squares += squares_c;
    return static_cast<double>(sum * sum / squares);
}

/// Holdings after one period: w_i * g_i / sum_j w_j * g_j with gross return
/// g_i = 1 / (1 + X~_i).
inline Weights drift_weights(const Weights& w, const Eigen::Ref<const VectorXd>& rel_loss_row) {
    if (static_cast<Eigen::Index>(w.size()) != rel_loss_row.size()) {
        fail(ErrorCode::DimensionMismatch, "weights and loss row differ in length");
    }
    const VectorXd gross = (1.0 + rel_loss_row.array()).inverse().matrix();
    const VectorXd grown = w.values().cwiseProduct(gross);
    const double total = grown.sum();
    if (!(total > 0.0) || !std::isfinite(total)) fail(ErrorCode::DegeneratePortfolio, "portfolio value vanished");
    return Weights::normalized(grown / total, w.tickers());
}

inline BacktestLedger run_backtest(const PricePanel& full_panel, const BacktestConfig& cfg) {
    cfg.validate();
    const PricePanel panel = cfg.universe.empty() ? full_panel : full_panel.select(cfg.universe);
    const LossMatrix losses = compute_losses(panel);
    const std::size_t periods = losses.num_periods();
    const std::size_t w_len = cfg.window_len;
    if (periods < w_len + 1) {
        fail(ErrorCode::InsufficientData, "panel has " + std::to_string(periods) + " return periods, need window " +
                                              std::to_string(w_len) + " plus at least one backtest day");
    }
    const std::size_t n_days = periods - w_len;

    // Estimation: a pure function of each rebalance day's window.
    struct Target {
        std::optional<TargetAllocation> allocation;
        std::string error;
    };
    std::vector<Target> targets(n_days);
    for (std::size_t d = 0; d < n_days; d += cfg.rebalance_every) {
        const auto window = losses.log_losses.middleRows(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(w_len));
        try {
            targets[d].allocation = target_weights(cfg.strategy, window, losses.tickers);
        } catch (const Error& e) {
            targets[d].error = e.what();
        }
    }

    // Accounting: sequential fold over days.
    BacktestLedger ledger;
    ledger.strategy = std::string(to_string(cfg.strategy.kind));
    ledger.tickers = losses.tickers;
    ledger.window_len = w_len;
    ledger.rebalance_every = cfg.rebalance_every;
    ledger.initial_value = cfg.initial_value;
    ledger.days.reserve(n_days);

    double value = cfg.initial_value;
    for (std::size_t d = 0; d < n_days; ++d) {
        const std::size_t t = w_len + d;
        DayRecord rec;
        rec.date = losses.dates[t];
        rec.period = t;
        std::optional<Weights> before;
        if (d > 0) {
            const auto& prev = ledger.days.back();
            before = drift_weights(prev.weights_after, losses.rel_losses.row(static_cast<Eigen::Index>(t - 1)).transpose());
        }

        const bool rebalance_day = d % cfg.rebalance_every == 0;
        if (rebalance_day && targets[d].allocation) {
            const auto& alloc = *targets[d].allocation;
            rec.weights_after = alloc.weights;
            rec.rebalanced = true;
            rec.converged = alloc.converged;
            rec.objective = alloc.objective;
            rec.alpha_hat = alloc.alpha_hat;
            rec.k = alloc.k;
            if (!alloc.converged) rec.note = "solver did not certify convergence";
        } else if (rebalance_day) {
            rec.fallback = true;
            rec.note = targets[d].error;
            rec.weights_after = before ? *before : Weights::equal(losses.num_assets(), losses.tickers);
            if (!before) rec.rebalanced = true;
        } else {
            rec.weights_after = *before;
        }
        // The opening allocation is not counted as a rebalancing trade.
        rec.weights_before = before ? *before : rec.weights_after;
        rec.turnover = (rec.weights_after.values() - rec.weights_before.values()).lpNorm<1>();
        rec.concentration = concentration_coefficient(rec.weights_after);
        rec.period_return =
            portfolio_relative_return(rec.weights_after, losses.rel_losses.row(static_cast<Eigen::Index>(t)).transpose());
        value *= 1.0 + rec.period_return;
        rec.portfolio_value = value;
        ledger.days.push_back(std::move(rec));
    }
    return ledger;
}

}  // namespace eri
