#pragma once
// Euclidean projection onto the unit simplex and a projected-gradient solver
// for smooth (or C^1 piecewise-smooth) convex objectives over it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "eri/error.hpp"
#include "eri/weights.hpp"

namespace eri {

struct SolverOptions {
    double tolerance = 1e-7;       // on the scale-free projected-gradient residual
    std::size_t max_iterations = 5000;
    double armijo = 1e-4;          // sufficient-decrease constant
    double backtrack = 0.5;        // step shrink factor
    double snap_threshold = 1e-10; // weights below this end as exact zeros
};

/// argmin_{w in simplex} ||w - v||_2 via the sort-and-threshold method.
inline VectorXd project_simplex(const Eigen::Ref<const VectorXd>& v) {
    const Eigen::Index n = v.size();
    if (n == 0) return VectorXd{};
    // P(v + c) = P(v) for constant c; shifting by the max keeps the unit sum
    // representable when v is huge
    const VectorXd shifted = v.array() - v.maxCoeff();
    std::vector<double> sorted(shifted.data(), shifted.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cumulative += sorted[static_cast<std::size_t>(i)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
    }
    return (shifted.array() - theta).max(0.0).matrix();
}

/// ||P(x - g/s) - x||_inf with s = ||g||_inf: zero exactly at KKT points and
/// unchanged when the objective is multiplied by a positive constant.
inline double projected_gradient_residual(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& g) {
    const double scale = g.lpNorm<Eigen::Infinity>();
    if (!(scale > 0.0)) return 0.0;
    return (project_simplex(x - g / scale) - x).lpNorm<Eigen::Infinity>();
}

struct SimplexSolution {
    VectorXd x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double kkt_residual = std::numeric_limits<double>::infinity();
};

/// Spectral projected gradient with monotone Armijo backtracking along the
/// projection arc, started from x0 (projected first). Objective and gradient
/// are callables VectorXd -> double and VectorXd -> VectorXd.
template <typename Objective, typename Gradient>
SimplexSolution minimize_on_simplex(Objective&& objective, Gradient&& gradient, const VectorXd& x0,
                                    const SolverOptions& opts) {
    SimplexSolution sol;
    VectorXd x = project_simplex(x0);
    const VectorXd start = x;
    double f = objective(x);
    const double f_start = f;
    VectorXd g = gradient(x);

    const double g_scale = g.lpNorm<Eigen::Infinity>();
    double step = g_scale > 0.0 ? 1.0 / g_scale : 1.0;
    const double step_min = step * 1e-30;
    const double step_max = step * 1e30;

    std::size_t it = 0;
    double residual = projected_gradient_residual(x, g);
    while (residual > opts.tolerance && it < opts.max_iterations) {
        const VectorXd d = project_simplex(x - step * g) - x;
        const double slope = g.dot(d);
        if (!(slope < 0.0)) break;  // no descent left at working precision

        double t = 1.0;
        VectorXd trial = x + d;
        double f_trial = objective(trial);
        while (f_trial > f + opts.armijo * t * slope) {
            t *= opts.backtrack;
            if (t < 1e-20) break;
            trial = x + t * d;
            f_trial = objective(trial);
        }
        if (t < 1e-20) break;

        const VectorXd g_trial = gradient(trial);
        const VectorXd s = trial - x;
        const VectorXd y = g_trial - g;
        const double sy = s.dot(y);
        step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, step_min, step_max) : step_max;

        x = trial;
        f = f_trial;
        g = g_trial;
        ++it;
        residual = projected_gradient_residual(x, g);
    }
    sol.converged = residual <= opts.tolerance;

    if (opts.snap_threshold > 0.0) {
        VectorXd snapped = x;
        for (Eigen::Index i = 0; i < snapped.size(); ++i) {
            if (snapped[i] < opts.snap_threshold) snapped[i] = 0.0;
        }
        snapped /= snapped.sum();
        x = snapped;
        f = objective(x);
        g = gradient(x);
        residual = projected_gradient_residual(x, g);
    }
    if (f > f_start) {
        x = start;
        f = f_start;
        residual = projected_gradient_residual(x, gradient(x));
    }
    sol.x = std::move(x);
    sol.value = f;
    sol.iterations = it;
    sol.kkt_residual = residual;
    sol.converged = sol.converged && residual <= opts.tolerance;
    return sol;
}

}  // namespace eri
