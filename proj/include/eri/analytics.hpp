#pragma once
// Backtest statistics and diagnostics. Daily ratios are annualized with
// sqrt(252); the risk-free rate is zero throughout.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "eri/backtest.hpp"
#include "eri/error.hpp"
#include "eri/market_data.hpp"
#include "eri/weights.hpp"

namespace eri {

inline constexpr double kTradingDaysPerYear = 252.0;
inline constexpr double kDefaultWeightFloor = 1e-4;
inline constexpr double kStarrLevel = 0.95;

namespace detail {

// Smallest j in [1, n] with j/n >= level. The slack absorbs representation
// error in products such as 0.05 * 20.
inline std::size_t quantile_rank(std::size_t n, double level) {
    const double target = level * static_cast<double>(n);
    auto j = static_cast<std::size_t>(std::max(0.0, std::ceil(target - 1e-9)));
    return std::clamp<std::size_t>(j, 1, n);
}

inline double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace detail

/// Empirical VaR_level := inf{x : F_n(x) >= level}, i.e. the smallest sample
/// value whose empirical CDF reaches the level.
inline double var_quantile(std::span<const double> sample, double level) {
    if (sample.empty()) fail(ErrorCode::EmptySample, "quantile of an empty sample");
    if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidSpec, "quantile level must lie in (0,1)");
    std::vector<double> sorted(sample.begin(), sample.end());
    const std::size_t j = detail::quantile_rank(sorted.size(), level);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(j - 1), sorted.end());
    return sorted[j - 1];
}

struct ShortfallEstimate {
    double expected_shortfall = 0.0;  // positive loss magnitude
    double lower_quantile = 0.0;      // VaR_{1-level} of the returns
    std::size_t tail_count = 0;
};

/// Expected shortfall at `level` from a return sample: minus the mean of the
/// returns at or below the empirical (1 - level) quantile. The boundary
/// observation is included, so for distinct values the tail holds
/// ceil((1 - level) * n) returns.
inline ShortfallEstimate expected_shortfall_detail(std::span<const double> returns, double level) {
    if (returns.empty()) fail(ErrorCode::EmptySample, "expected shortfall of an empty sample");
    ShortfallEstimate est;
    est.lower_quantile = var_quantile(returns, 1.0 - level);
    double sum = 0.0;
    for (double r : returns) {
        if (r <= est.lower_quantile) {
            sum += r;
            ++est.tail_count;
        }
    }
    if (est.tail_count == 0) fail(ErrorCode::EmptyTail, "no returns in the lower tail");
    est.expected_shortfall = -sum / static_cast<double>(est.tail_count);
    return est;
}

inline double expected_shortfall_returns(std::span<const double> returns, double level) {
    return expected_shortfall_detail(returns, level).expected_shortfall;
}

inline double sample_stddev(std::span<const double> x) {
    const double m = detail::mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double annualized_sharpe(std::span<const double> daily_returns) {
    if (daily_returns.size() < 2) fail(ErrorCode::InsufficientData, "Sharpe ratio needs two returns");
    const double m = detail::mean(daily_returns);
    const double sd = sample_stddev(daily_returns);
    double scale = 0.0;
    for (double v : daily_returns) scale = std::max(scale, std::abs(v));
    if (!(sd > 1e-12 * scale)) fail(ErrorCode::ZeroVolatility, "returns have zero standard deviation");
    return m / sd * std::sqrt(kTradingDaysPerYear);
}

inline double annualized_starr(std::span<const double> daily_returns, double level = kStarrLevel) {
    const double es = expected_shortfall_returns(daily_returns, level);
    if (es == 0.0) fail(ErrorCode::ZeroVolatility, "expected shortfall is zero");
    return detail::mean(daily_returns) / es * std::sqrt(kTradingDaysPerYear);
}

struct ReturnSummary {
    double cumulative = 0.0;
    double annualized = 0.0;
};

/// CR = V_T / V_0 - 1 and geometric AR = (1 + CR)^(periods_per_year / T) - 1,
/// T being the number of periods in the path.
inline ReturnSummary cumulative_and_annualized_return(std::span<const double> value_path,
                                                      double periods_per_year = kTradingDaysPerYear) {
    if (value_path.size() < 2) fail(ErrorCode::InsufficientData, "value path needs two points");
    for (double v : value_path) {
        if (!(v > 0.0)) fail(ErrorCode::InvalidSpec, "value path must be positive");
    }
    ReturnSummary s;
    s.cumulative = value_path.back() / value_path.front() - 1.0;
    const double periods = static_cast<double>(value_path.size() - 1);
    s.annualized = std::pow(1.0 + s.cumulative, periods_per_year / periods) - 1.0;
    return s;
}

inline double max_drawdown(std::span<const double> value_path) {
    double peak = 0.0;
    double worst = 0.0;
    for (double v : value_path) {
        if (!(v > 0.0)) fail(ErrorCode::InvalidSpec, "value path must be positive");
        peak = std::max(peak, v);
        worst = std::max(worst, 1.0 - v / peak);
    }
    return worst;
}

/// Share of total sample variance carried by the first principal component of
/// the assets weighted above weight_floor, over the given window.
inline double first_pca_explained(const Eigen::Ref<const MatrixXd>& loss_window, const Weights& w,
                                  double weight_floor = kDefaultWeightFloor) {
    if (static_cast<Eigen::Index>(w.size()) != loss_window.cols()) {
        fail(ErrorCode::DimensionMismatch, "weights do not match the window's assets");
    }
    std::vector<Eigen::Index> relevant;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] > weight_floor) relevant.push_back(static_cast<Eigen::Index>(i));
    }
    if (relevant.empty()) fail(ErrorCode::NoRelevantAssets, "no asset is weighted above the floor");
    if (relevant.size() == 1) return 1.0;
    if (loss_window.rows() < 2) fail(ErrorCode::TooFewRows, "PCA needs at least two observations");

    MatrixXd sub(loss_window.rows(), static_cast<Eigen::Index>(relevant.size()));
    for (std::size_t j = 0; j < relevant.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = loss_window.col(relevant[j]);
    const MatrixXd centered = sub.rowwise() - sub.colwise().mean();
    const MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(sub.rows() - 1);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    const double total = ev.sum();
    if (!(total > 0.0)) return 1.0;
    return ev.maxCoeff() / total;
}

struct NormalReference {};
struct StudentTReference {
    double nu = 3.0;
};
using QqReference = std::variant<NormalReference, StudentTReference>;

struct QqMarker {
    double level = 0.0;
    double theoretical = 0.0;  // standardized reference quantile at this level
};

struct QqData {
    std::vector<std::pair<double, double>> points;  // (theoretical, empirical)
    std::vector<QqMarker> markers;
};

inline const std::vector<double>& qq_marker_levels() {
    static const std::vector<double> levels{0.004, 0.10, 0.90, 0.996};
    return levels;
}

/// Sorted sample against reference quantiles at plotting positions
/// (i - 0.5)/n. The reference is moved to the sample's median and scaled to
/// its interquartile range.
inline QqData qq_data(std::span<const double> sample, const QqReference& reference) {
    if (sample.size() < 10) fail(ErrorCode::InsufficientData, "QQ data needs at least 10 observations");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    auto ref_quantile = [&](double p) {
        return std::visit(
            [p](const auto& r) -> double {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, NormalReference>) {
                    return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
                } else {
                    if (!(r.nu > 0.0)) fail(ErrorCode::InvalidSpec, "t reference needs nu > 0");
                    return boost::math::quantile(boost::math::students_t_distribution<double>{r.nu}, p);
                }
            },
            reference);
    };
    // Linear interpolation between order statistics for the sample's own
    // location and scale.
    auto sample_quantile = [&](double p) {
        const double h = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, n - 1);
        return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    const double location = sample_quantile(0.5);
    const double scale = (sample_quantile(0.75) - sample_quantile(0.25)) / (ref_quantile(0.75) - ref_quantile(0.25));

    QqData out;
    out.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        out.points.emplace_back(location + scale * ref_quantile(p), sorted[i]);
    }
    for (double level : qq_marker_levels()) out.markers.push_back({level, location + scale * ref_quantile(level)});
    return out;
}

/// Table-1 style summary of a ledger. A statistic that cannot be formed (too
/// few days, zero volatility) is left empty.
struct StatsReport {
    std::optional<double> cumulative_return;
    std::optional<double> annualized_return;
    std::optional<double> annualized_sharpe;
    std::optional<double> annualized_starr;
    std::optional<double> max_drawdown;
    std::optional<double> avg_concentration;
    std::optional<double> avg_turnover;
    std::optional<double> avg_first_pca_explained;
    std::size_t days = 0;
    std::size_t assets = 0;
    std::size_t es_tail_count = 0;
    std::vector<std::string> notes;
};

/// Per-day first-PCA share for the assets held that day, over that day's
/// estimation window. Days without relevant assets yield NaN.
inline std::vector<double> daily_first_pca(const BacktestLedger& ledger, const LossMatrix& losses,
                                           double weight_floor = kDefaultWeightFloor) {
    std::vector<double> out;
    out.reserve(ledger.days.size());
    for (const auto& day : ledger.days) {
        if (day.period < ledger.window_len || day.period > losses.num_periods()) {
            fail(ErrorCode::DimensionMismatch, "ledger day " + day.date + " lies outside the loss data");
        }
        const auto window = losses.log_losses.middleRows(static_cast<Eigen::Index>(day.period - ledger.window_len),
                                                         static_cast<Eigen::Index>(ledger.window_len));
        try {
            out.push_back(first_pca_explained(window, day.weights_after, weight_floor));
        } catch (const Error&) {
            out.push_back(std::nan(""));
        }
    }
    return out;
}

inline StatsReport summarize(const BacktestLedger& ledger, const LossMatrix& losses) {
    if (ledger.days.empty()) fail(ErrorCode::InsufficientData, "ledger has no days");
    if (losses.num_assets() != ledger.tickers.size()) {
        fail(ErrorCode::DimensionMismatch, "loss data and ledger cover different assets");
    }
    StatsReport rep;
    rep.days = ledger.days.size();
    rep.assets = ledger.tickers.size();
    const auto path = ledger.value_path();
    const auto rets = ledger.returns();

    const auto cr = cumulative_and_annualized_return(path);
    rep.cumulative_return = cr.cumulative;
    rep.annualized_return = cr.annualized;
    rep.max_drawdown = max_drawdown(path);
    try {
        rep.annualized_sharpe = annualized_sharpe(rets);
    } catch (const Error& e) {
        rep.notes.push_back(std::string("AS: ") + e.what());
    }
    try {
        const auto es = expected_shortfall_detail(rets, kStarrLevel);
        rep.es_tail_count = es.tail_count;
        rep.annualized_starr = annualized_starr(rets, kStarrLevel);
        rep.notes.push_back("ES tail: " + std::to_string(es.tail_count) +
                            " returns at or below the empirical 5% quantile (boundary included)");
    } catch (const Error& e) {
        rep.notes.push_back(std::string("AST: ") + e.what());
    }

    double cc = 0.0;
    double turnover = 0.0;
    for (const auto& d : ledger.days) {
        cc += d.concentration;
        turnover += d.turnover;
    }
    rep.avg_concentration = cc / static_cast<double>(rep.days);
    rep.avg_turnover = turnover / static_cast<double>(rep.days);

    const auto pca = daily_first_pca(ledger, losses);
    double pca_sum = 0.0;
    std::size_t pca_days = 0;
    for (double v : pca) {
        if (std::isfinite(v)) {
            pca_sum += v;
            ++pca_days;
        }
    }
    if (pca_days > 0) rep.avg_first_pca_explained = pca_sum / static_cast<double>(pca_days);
    if (pca_days < rep.days) rep.notes.push_back("PCA undefined on " + std::to_string(rep.days - pca_days) + " days");
    return rep;
}

}  // namespace eri
