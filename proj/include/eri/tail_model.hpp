#pragma once
// Polar (L1) decomposition of loss vectors and estimation of the tail index
// and the empirical spectral measure over a window.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "eri/error.hpp"
#include "eri/weights.hpp"

namespace eri {

inline constexpr std::size_t kMinTailWindow = 20;

struct PolarSample {
    double radius = 0.0;  // ||X||_1
    VectorXd angle;       // X / ||X||_1, empty when degenerate
    std::size_t source_row = 0;
    bool degenerate = false;  // radius == 0, angle undefined
};

/// The top-k fraction of the window is treated as extreme.
struct StaticFraction {
    double fraction = 0.10;
};

/// Tail-fraction selection rule. New rules are added as variant alternatives
/// together with an overload in tail_fraction_size.
using TailRule = std::variant<StaticFraction>;

/// Hill tail index plus the angular parts of the same top-k observations.
struct TailEstimate {
    double alpha_hat = 0.0;
    std::size_t k = 0;
    MatrixXd spectral_sample;               // k x N, each row on the L1 unit sphere
    std::vector<std::size_t> sample_rows;   // window rows, largest radius first
    std::size_t window_len = 0;

    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(spectral_sample.cols()); }

    /// Builds an estimate directly from angle vectors (rows are L1-normalized).
    /// Used for synthetic spectral measures that do not come from a window.
    static TailEstimate from_spectral(const MatrixXd& angles, double alpha_hat) {
        if (angles.rows() == 0 || angles.cols() == 0) fail(ErrorCode::InsufficientData, "empty spectral sample");
        if (!(alpha_hat > 0.0) || !std::isfinite(alpha_hat)) {
            fail(ErrorCode::InvalidSpec, "tail index must be positive and finite");
        }
        TailEstimate t;
        t.alpha_hat = alpha_hat;
        t.k = static_cast<std::size_t>(angles.rows());
        t.spectral_sample = angles;
        for (Eigen::Index r = 0; r < angles.rows(); ++r) {
            const double norm = angles.row(r).lpNorm<1>();
            if (!(norm > 0.0)) fail(ErrorCode::InvalidSpec, "zero angle vector in spectral sample");
            t.spectral_sample.row(r) /= norm;
        }
        t.sample_rows.resize(t.k);
        std::iota(t.sample_rows.begin(), t.sample_rows.end(), std::size_t{0});
        t.window_len = t.k + 1;
        return t;
    }
};

inline std::vector<PolarSample> polar_decompose(const Eigen::Ref<const MatrixXd>& loss_rows) {
    std::vector<PolarSample> out;
    out.reserve(static_cast<std::size_t>(loss_rows.rows()));
    for (Eigen::Index r = 0; r < loss_rows.rows(); ++r) {
        PolarSample s;
        s.source_row = static_cast<std::size_t>(r);
        s.radius = loss_rows.row(r).lpNorm<1>();
        if (s.radius > 0.0) {
            s.angle = loss_rows.row(r).transpose() / s.radius;
        } else {
            s.degenerate = true;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

struct TailOrder {
    std::vector<std::size_t> indices;  // positive radii, descending; ties by smaller index
};

inline TailOrder descending_positive(std::span<const double> radii) {
    TailOrder order;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] > 0.0 && std::isfinite(radii[i])) order.indices.push_back(i);
    }
    std::stable_sort(order.indices.begin(), order.indices.end(),
                     [&](std::size_t a, std::size_t b) { return radii[a] > radii[b]; });
    return order;
}

inline double hill_from_order(std::span<const double> radii, const TailOrder& order, std::size_t k) {
    if (k < 1) fail(ErrorCode::InsufficientData, "tail fraction size must be at least 1");
    if (order.indices.size() < k + 1) {
        fail(ErrorCode::InsufficientData, "need " + std::to_string(k + 1) + " positive radii, have " +
                                              std::to_string(order.indices.size()));
    }
    const double log_threshold = std::log(radii[order.indices[k]]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::log(radii[order.indices[j]]) - log_threshold;
    if (!(sum > 0.0)) fail(ErrorCode::DegenerateTail, "top " + std::to_string(k + 1) + " radii are all equal");
    return static_cast<double>(k) / sum;
}

}  // namespace detail

/// Hill estimator k / sum_{j<=k} log(R_(j) / R_(k+1)) on the descending
/// order statistics of the strictly positive radii.
inline double hill_estimate(std::span<const double> radii, std::size_t k) {
    return detail::hill_from_order(radii, detail::descending_positive(radii), k);
}

inline std::size_t tail_fraction_size(std::size_t window_len, const TailRule& rule) {
    if (window_len < kMinTailWindow) {
        fail(ErrorCode::InsufficientData, "window of " + std::to_string(window_len) + " rows is shorter than " +
                                              std::to_string(kMinTailWindow));
    }
    return std::visit(
        [&](const StaticFraction& r) -> std::size_t {
            if (!(r.fraction > 0.0 && r.fraction < 1.0)) {
                fail(ErrorCode::FractionOutOfRange, "tail fraction " + std::to_string(r.fraction) + " not in (0,1)");
            }
            const auto k = static_cast<std::size_t>(std::llround(r.fraction * static_cast<double>(window_len)));
            return std::clamp<std::size_t>(k, 1, window_len - 1);
        },
        rule);
}

/// Hill estimate of the L1 radii in the window and the empirical spectral
/// measure formed by the angles of the same k largest-radius rows. Rows with
/// zero radius take part in neither.
inline TailEstimate estimate_tail(const Eigen::Ref<const MatrixXd>& loss_rows, const TailRule& rule) {
    const auto window_len = static_cast<std::size_t>(loss_rows.rows());
    std::vector<double> radii(window_len);
    for (std::size_t r = 0; r < window_len; ++r) radii[r] = loss_rows.row(static_cast<Eigen::Index>(r)).lpNorm<1>();

    const auto order = detail::descending_positive(radii);
    if (order.indices.size() < kMinTailWindow) {
        fail(ErrorCode::InsufficientData, "window has " + std::to_string(order.indices.size()) +
                                              " non-degenerate rows, need " + std::to_string(kMinTailWindow));
    }
    const std::size_t k = tail_fraction_size(window_len, rule);

    TailEstimate est;
    est.alpha_hat = detail::hill_from_order(radii, order, k);
    est.k = k;
    est.window_len = window_len;
    est.spectral_sample.resize(static_cast<Eigen::Index>(k), loss_rows.cols());
    est.sample_rows.assign(order.indices.begin(), order.indices.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t j = 0; j < k; ++j) {
        const auto row = static_cast<Eigen::Index>(order.indices[j]);
        est.spectral_sample.row(static_cast<Eigen::Index>(j)) = loss_rows.row(row) / radii[order.indices[j]];
    }
    return est;
}

/// Hill estimate for a single asset, with |X_i| as the one-dimensional radius.
inline double per_stock_alpha(std::span<const double> losses, const TailRule& rule) {
    if (losses.size() < kMinTailWindow) {
        fail(ErrorCode::InsufficientData, "per-stock estimate needs at least " + std::to_string(kMinTailWindow) +
                                              " observations");
    }
    std::vector<double> radii(losses.size());
    std::transform(losses.begin(), losses.end(), radii.begin(), [](double x) { return std::abs(x); });
    return hill_estimate(radii, tail_fraction_size(losses.size(), rule));
}

inline double per_stock_alpha(const Eigen::Ref<const VectorXd>& losses, const TailRule& rule) {
    return per_stock_alpha(std::span<const double>(losses.data(), static_cast<std::size_t>(losses.size())), rule);
}

}  // namespace eri
