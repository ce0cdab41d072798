#pragma once
// Strategy dispatch (ERI, minimum variance, equal weight) and static grouping
// of assets by their individual tail index.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eri/eri_optimizer.hpp"
#include "eri/error.hpp"
#include "eri/market_data.hpp"
#include "eri/mv_optimizer.hpp"
#include "eri/tail_model.hpp"
#include "eri/weights.hpp"

namespace eri {

enum class StrategyKind { ERI, MV, EW };

inline constexpr std::string_view to_string(StrategyKind kind) noexcept {
    switch (kind) {
        case StrategyKind::ERI: return "ERI";
        case StrategyKind::MV: return "MV";
        case StrategyKind::EW: return "EW";
    }
    return "?";
}

inline StrategyKind parse_strategy_kind(std::string_view name) {
    if (name == "ERI" || name == "eri") return StrategyKind::ERI;
    if (name == "MV" || name == "mv") return StrategyKind::MV;
    if (name == "EW" || name == "ew") return StrategyKind::EW;
    fail(ErrorCode::InvalidSpec, "unknown strategy '" + std::string(name) + "' (expected ERI, MV or EW)");
}

/// Strategy parameters. tail_rule is set only for ERI, ridge only for MV.
struct StrategySpec {
    StrategyKind kind = StrategyKind::EW;
    std::optional<TailRule> tail_rule;
    std::optional<double> ridge;
    SolverOptions solver;

    static StrategySpec eri(TailRule rule = StaticFraction{}, SolverOptions opts = {}) {
        return {StrategyKind::ERI, rule, std::nullopt, opts};
    }
    static StrategySpec mv(double ridge = 0.0, SolverOptions opts = {}) {
        return {StrategyKind::MV, std::nullopt, ridge, opts};
    }
    static StrategySpec ew() { return {StrategyKind::EW, std::nullopt, std::nullopt, {}}; }

    void validate() const {
        const bool wants_rule = kind == StrategyKind::ERI;
        const bool wants_ridge = kind == StrategyKind::MV;
        if (tail_rule.has_value() != wants_rule) {
            fail(ErrorCode::InvalidSpec, "tail_rule must be set exactly for ERI strategies");
        }
        if (ridge.has_value() != wants_ridge) fail(ErrorCode::InvalidSpec, "ridge must be set exactly for MV strategies");
        if (ridge && *ridge < 0.0) fail(ErrorCode::InvalidSpec, "ridge must be non-negative");
    }
};

/// Weights plus whatever the strategy learned while producing them.
struct TargetAllocation {
    Weights weights;
    std::optional<double> objective;  // gamma-hat for ERI, w^T C w for MV
    std::optional<double> alpha_hat;
    std::optional<std::size_t> k;
    bool converged = true;
    double kkt_residual = 0.0;
    bool nonconvex_regime = false;
};

/// Target weights from a window of log losses (rows = days, columns = assets).
inline TargetAllocation target_weights(const StrategySpec& spec, const Eigen::Ref<const MatrixXd>& window,
                                       const std::vector<std::string>& tickers = {}) {
    spec.validate();
    const auto n = static_cast<std::size_t>(window.cols());
    if (n == 0) fail(ErrorCode::DimensionMismatch, "window has no assets");
    if (!tickers.empty() && tickers.size() != n) fail(ErrorCode::DimensionMismatch, "tickers do not match window");

    TargetAllocation out;
    switch (spec.kind) {
        case StrategyKind::EW:
            out.weights = Weights::equal(n, tickers);
            break;
        case StrategyKind::MV: {
            const auto cov = empirical_covariance(window, *spec.ridge);
            const auto sol = minimize_variance(cov, spec.solver);
            out.weights = sol.weights.with_tickers(tickers);
            out.objective = sol.variance;
            out.converged = sol.converged;
            out.kkt_residual = sol.kkt_residual;
            break;
        }
        case StrategyKind::ERI: {
            const auto tail = estimate_tail(window, *spec.tail_rule);
            const auto sol = minimize_eri(tail, n, spec.solver);
            out.weights = sol.weights.with_tickers(tickers);
            out.objective = sol.gamma;
            out.alpha_hat = tail.alpha_hat;
            out.k = tail.k;
            out.converged = sol.converged;
            out.kkt_residual = sol.kkt_residual;
            out.nonconvex_regime = sol.nonconvex_regime;
            break;
        }
    }
    return out;
}

/// Static assignment of assets to tail-index groups, numbered from 1.
/// With cut points c_1 < ... < c_m: group 1 is alpha <= c_1, group m+1 is
/// alpha >= c_m, and group i in between is c_{i-1} < alpha <= c_i (for the
/// default two cuts the middle group is the open interval).
struct AlphaGrouping {
    std::vector<double> cut_points;
    std::vector<std::string> tickers;           // universe order
    std::map<std::string, int> assignment;      // ticker -> group
    std::map<std::string, double> alpha_hat;    // ticker -> per-stock estimate
    std::string as_of;

    [[nodiscard]] std::size_t group_count() const noexcept { return cut_points.size() + 1; }

    [[nodiscard]] std::vector<std::string> members(int group) const {
        std::vector<std::string> out;
        for (const auto& t : tickers) {
            if (assignment.at(t) == group) out.push_back(t);
        }
        return out;
    }
};

inline int assign_group(double alpha, const std::vector<double>& cuts) {
    if (cuts.empty()) return 1;
    if (alpha <= cuts.front()) return 1;
    if (alpha >= cuts.back()) return static_cast<int>(cuts.size()) + 1;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (alpha <= cuts[i]) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(cuts.size()) + 1;
}

inline AlphaGrouping group_by_alpha(const std::vector<std::string>& tickers, const std::vector<double>& alphas,
                                    std::vector<double> cut_points, std::string as_of = {}) {
    if (!std::is_sorted(cut_points.begin(), cut_points.end()) ||
        std::adjacent_find(cut_points.begin(), cut_points.end()) != cut_points.end()) {
        fail(ErrorCode::InvalidSpec, "cut points must be strictly ascending");
    }
    if (tickers.size() != alphas.size()) fail(ErrorCode::DimensionMismatch, "one alpha per ticker required");
    AlphaGrouping g;
    g.cut_points = std::move(cut_points);
    g.tickers = tickers;
    g.as_of = std::move(as_of);
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        g.assignment[tickers[i]] = assign_group(alphas[i], g.cut_points);
        g.alpha_hat[tickers[i]] = alphas[i];
    }
    return g;
}

/// Groups assets by per-stock Hill estimates over the window_len losses that
/// precede first_backtest_date.
inline AlphaGrouping build_grouping(const PricePanel& panel, const std::string& first_backtest_date,
                                    std::size_t window_len, std::vector<double> cut_points,
                                    const TailRule& rule = StaticFraction{}) {
    const LossMatrix losses = compute_losses(panel);
    const auto it = std::find(losses.dates.begin(), losses.dates.end(), first_backtest_date);
    if (it == losses.dates.end()) {
        fail(ErrorCode::InsufficientData, "first backtest date " + first_backtest_date + " not among return dates");
    }
    const auto t = static_cast<std::size_t>(it - losses.dates.begin());
    if (t < window_len) {
        fail(ErrorCode::InsufficientData, "only " + std::to_string(t) + " losses precede " + first_backtest_date +
                                              ", window needs " + std::to_string(window_len));
    }
    const auto window = losses.log_losses.middleRows(static_cast<Eigen::Index>(t - window_len),
                                                     static_cast<Eigen::Index>(window_len));
    std::vector<double> alphas(losses.num_assets());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const VectorXd col = window.col(static_cast<Eigen::Index>(i));
        alphas[i] = per_stock_alpha(col, rule);
    }
    return group_by_alpha(losses.tickers, alphas, std::move(cut_points), first_backtest_date);
}

}  // namespace eri
