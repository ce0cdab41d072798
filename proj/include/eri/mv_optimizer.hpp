#pragma once
// Sample covariance of log losses and the long-only minimum-variance portfolio.

#include <string>

#include <Eigen/Dense>

#include "eri/error.hpp"
#include "eri/simplex.hpp"
#include "eri/weights.hpp"

namespace eri {

struct CovarianceEstimate {
    MatrixXd matrix;
    std::size_t window_len = 0;
    double ridge = 0.0;
};

/// Divisor window_len - 1, plus ridge on the diagonal.
inline CovarianceEstimate empirical_covariance(const Eigen::Ref<const MatrixXd>& loss_rows, double ridge = 0.0) {
    if (loss_rows.rows() < 2) fail(ErrorCode::TooFewRows, "covariance needs at least two rows");
    if (ridge < 0.0) fail(ErrorCode::InvalidSpec, "ridge must be non-negative");
    const MatrixXd centered = loss_rows.rowwise() - loss_rows.colwise().mean();
    CovarianceEstimate est;
    est.matrix = (centered.transpose() * centered) / static_cast<double>(loss_rows.rows() - 1);
    est.matrix = 0.5 * (est.matrix + est.matrix.transpose());
    if (ridge > 0.0) est.matrix.diagonal().array() += ridge;
    est.window_len = static_cast<std::size_t>(loss_rows.rows());
    est.ridge = ridge;
    return est;
}

struct MvSolution {
    Weights weights;
    double variance = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
};

inline MvSolution minimize_variance(const CovarianceEstimate& cov, const SolverOptions& opts = {}) {
    const Eigen::Index n = cov.matrix.rows();
    if (n < 1 || cov.matrix.cols() != n) fail(ErrorCode::DimensionMismatch, "covariance must be square and nonempty");
    const MatrixXd& c = cov.matrix;
    const VectorXd start = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const auto result = minimize_on_simplex([&](const VectorXd& w) { return w.dot(c * w); },
                                            [&](const VectorXd& w) -> VectorXd { return 2.0 * (c * w); }, start, opts);
    MvSolution sol;
    sol.weights = Weights::normalized(result.x);
    sol.variance = result.value;
    sol.iterations = result.iterations;
    sol.converged = result.converged;
    sol.kkt_residual = result.kkt_residual;
    return sol;
}

}  // namespace eri
