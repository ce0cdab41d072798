#pragma once
// Plug-in Extreme Risk Index
//
//     gamma(w) = (1/k) * sum_j max(0, w^T Z_j)^alpha
//
// over the empirical spectral sample Z_1..Z_k, and its minimization over the
// long-only simplex. The functional is convex in w for alpha > 1; for
// alpha <= 1 the same solver runs but the result carries no certificate.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "eri/error.hpp"
#include "eri/simplex.hpp"
#include "eri/tail_model.hpp"
#include "eri/weights.hpp"

namespace eri {

struct EriSolution {
    Weights weights;
    double gamma = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
    bool nonconvex_regime = false;  // alpha_hat <= 1
};

[[nodiscard]] inline bool is_convex_regime(double alpha_hat) noexcept { return alpha_hat > 1.0; }

namespace detail {

inline void check_dimension(Eigen::Index w_size, const TailEstimate& tail) {
    if (w_size != tail.spectral_sample.cols()) {
        fail(ErrorCode::DimensionMismatch, "portfolio has " + std::to_string(w_size) + " assets, spectral sample " +
                                               std::to_string(tail.spectral_sample.cols()));
    }
}

}  // namespace detail

/// The raw functional, defined for any real vector (not only simplex points).
inline double eri_functional(const Eigen::Ref<const VectorXd>& w, const TailEstimate& tail) {
    detail::check_dimension(w.size(), tail);
    const VectorXd proj = tail.spectral_sample * w;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < proj.size(); ++j) {
        if (proj[j] > 0.0) sum += std::pow(proj[j], tail.alpha_hat);
    }
    return sum / static_cast<double>(proj.size());
}

/// Gradient of eri_functional. Samples with w^T Z_j <= 0 contribute nothing,
/// which selects a valid subgradient at kinks.
inline VectorXd eri_functional_gradient(const Eigen::Ref<const VectorXd>& w, const TailEstimate& tail) {
    detail::check_dimension(w.size(), tail);
    const VectorXd proj = tail.spectral_sample * w;
    VectorXd coeff = VectorXd::Zero(proj.size());
    for (Eigen::Index j = 0; j < proj.size(); ++j) {
        if (proj[j] > 0.0) coeff[j] = std::pow(proj[j], tail.alpha_hat - 1.0);
    }
    return (tail.alpha_hat / static_cast<double>(proj.size())) * (tail.spectral_sample.transpose() * coeff);
}

inline double eri_value(const Weights& w, const TailEstimate& tail) { return eri_functional(w.values(), tail); }

inline VectorXd eri_subgradient(const Weights& w, const TailEstimate& tail) {
    return eri_functional_gradient(w.values(), tail);
}

inline EriSolution minimize_eri(const TailEstimate& tail, std::size_t n_assets, const SolverOptions& opts = {}) {
    if (n_assets < 1) fail(ErrorCode::InvalidSpec, "portfolio needs at least one asset");
    if (tail.spectral_sample.rows() == 0) fail(ErrorCode::InsufficientData, "spectral sample is empty");
    detail::check_dimension(static_cast<Eigen::Index>(n_assets), tail);

    const VectorXd start = VectorXd::Constant(static_cast<Eigen::Index>(n_assets), 1.0 / static_cast<double>(n_assets));
    const auto result = minimize_on_simplex([&](const VectorXd& x) { return eri_functional(x, tail); },
                                            [&](const VectorXd& x) { return eri_functional_gradient(x, tail); },
                                            start, opts);
    EriSolution sol;
    sol.weights = Weights::normalized(result.x);
    sol.gamma = result.value;
    sol.iterations = result.iterations;
    sol.kkt_residual = result.kkt_residual;
    sol.nonconvex_regime = !is_convex_regime(tail.alpha_hat);
    sol.converged = result.converged && !sol.nonconvex_regime;
    return sol;
}

}  // namespace eri
