#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eri/error.hpp"

namespace eri {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kSimplexSumTolerance = 1e-9;

/// A long-only portfolio: a point on the unit simplex, optionally labelled
/// with asset identifiers. An empty ticker list means "anonymous".
class Weights {
public:
    Weights() = default;

    explicit Weights(VectorXd values, std::vector<std::string> tickers = {})
        : values_(std::move(values)), tickers_(std::move(tickers)) {
        if (values_.size() == 0) fail(ErrorCode::InvalidWeights, "weights vector is empty");
        if (!tickers_.empty() && static_cast<Eigen::Index>(tickers_.size()) != values_.size()) {
            fail(ErrorCode::DimensionMismatch, "weights and tickers differ in length");
        }
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            const double v = values_[i];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                fail(ErrorCode::InvalidWeights,
                     "weight " + std::to_string(i) + " = " + std::to_string(v) + " outside [0,1]");
            }
        }
        if (std::abs(values_.sum() - 1.0) > kSimplexSumTolerance) {
            fail(ErrorCode::InvalidWeights,
                 "weights sum to " + std::to_string(values_.sum()) + ", expected 1");
        }
    }

    static Weights equal(std::size_t n, std::vector<std::string> tickers = {}) {
        if (n == 0) fail(ErrorCode::InvalidWeights, "cannot build equal weights over zero assets");
        return Weights(VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)),
                       std::move(tickers));
    }

    /// Clips tiny negatives from floating-point noise, zeroes entries below
    /// snap, and renormalizes before validating.
    static Weights normalized(VectorXd raw, std::vector<std::string> tickers = {}, double snap = 0.0) {
        for (Eigen::Index i = 0; i < raw.size(); ++i) {
            if (raw[i] < snap) raw[i] = 0.0;
        }
        const double total = raw.sum();
        if (!(total > 0.0)) fail(ErrorCode::InvalidWeights, "weights have no positive mass");
        raw /= total;
        return Weights(std::move(raw), std::move(tickers));
    }

    [[nodiscard]] const VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<std::string>& tickers() const noexcept { return tickers_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

    [[nodiscard]] Weights with_tickers(std::vector<std::string> tickers) const {
        return Weights(values_, std::move(tickers));
    }

private:
    VectorXd values_;
    std::vector<std::string> tickers_;
};

}  // namespace eri
