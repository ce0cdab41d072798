#pragma once
// Seeded heavy-tailed samples and brute-force oracles for the estimators and
// the optimizer.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "eri/analytics.hpp"
#include "eri/eri_optimizer.hpp"
#include "eri/error.hpp"
#include "eri/market_data.hpp"
#include "eri/random.hpp"
#include "eri/tail_model.hpp"
#include "eri/weights.hpp"

namespace eri {

/// Gaussian vector with the given scale matrix divided by sqrt(W / nu),
/// W ~ chi^2(nu). Tail index nu.
struct MultivariateT {
    double nu = 3.0;
    MatrixXd scale = MatrixXd::Identity(2, 2);
};

/// Radius Pareto(alpha) on [1, inf), angle uniform on the L1 sphere with
/// independent random signs.
struct ParetoRadialUniformAngle {
    double alpha = 2.0;
    std::size_t dimension = 2;
};

/// n random L1-unit vectors, each emitted together with all its cyclic
/// coordinate shifts (n * dimension rows). The resulting empirical measure is
/// invariant under a transitive group of coordinate permutations.
struct ExchangeableSpectral {
    std::size_t dimension = 2;
};

/// Declared for completeness of the model family; sampling is unsupported.
struct AlphaStable {
    double alpha = 1.5;
    std::size_t dimension = 2;
};

using SyntheticDistribution = std::variant<MultivariateT, ParetoRadialUniformAngle, ExchangeableSpectral, AlphaStable>;

struct SyntheticSpec {
    SyntheticDistribution distribution;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline MatrixXd psd_factor(const MatrixXd& scale) {
    if (scale.rows() == 0 || scale.rows() != scale.cols()) fail(ErrorCode::InvalidSpec, "scale matrix must be square");
    if (!scale.isApprox(scale.transpose(), 1e-12)) fail(ErrorCode::InvalidSpec, "scale matrix must be symmetric");
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(scale);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
        fail(ErrorCode::InvalidSpec, "scale matrix is not positive semidefinite");
    }
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace detail

inline void validate(const SyntheticSpec& spec) {
    if (spec.n == 0) fail(ErrorCode::InvalidSpec, "sample size must be positive");
    std::visit(
        [](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, MultivariateT>) {
                if (!(d.nu > 0.0)) fail(ErrorCode::InvalidSpec, "degrees of freedom must be positive");
                (void)detail::psd_factor(d.scale);
            } else if constexpr (std::is_same_v<D, ParetoRadialUniformAngle>) {
                if (!(d.alpha > 0.0)) fail(ErrorCode::InvalidSpec, "tail index must be positive");
                if (d.dimension == 0) fail(ErrorCode::InvalidSpec, "dimension must be positive");
            } else if constexpr (std::is_same_v<D, ExchangeableSpectral>) {
                if (d.dimension == 0) fail(ErrorCode::InvalidSpec, "dimension must be positive");
            } else {
                fail(ErrorCode::InvalidSpec, "alpha-stable sampling is unsupported");
            }
        },
        spec.distribution);
}

/// Deterministic in (spec, seed).
inline MatrixXd sample(const SyntheticSpec& spec) {
    validate(spec);
    CounterRng rng(spec.seed);
    return std::visit(
        [&](const auto& d) -> MatrixXd {
            using D = std::decay_t<decltype(d)>;
            const auto n = static_cast<Eigen::Index>(spec.n);
            if constexpr (std::is_same_v<D, MultivariateT>) {
                const MatrixXd factor = detail::psd_factor(d.scale);
                const Eigen::Index dim = factor.rows();
                MatrixXd out(n, dim);
                VectorXd g(dim);
                for (Eigen::Index r = 0; r < n; ++r) {
                    for (Eigen::Index i = 0; i < dim; ++i) g[i] = rng.normal();
                    const double mixing = std::sqrt(rng.chi_squared(d.nu) / d.nu);
                    out.row(r) = (factor * g).transpose() / mixing;
                }
                return out;
            } else if constexpr (std::is_same_v<D, ParetoRadialUniformAngle>) {
                const auto dim = static_cast<Eigen::Index>(d.dimension);
                MatrixXd out(n, dim);
                for (Eigen::Index r = 0; r < n; ++r) {
                    double total = 0.0;
                    for (Eigen::Index i = 0; i < dim; ++i) {
                        out(r, i) = rng.exponential();
                        total += out(r, i);
                    }
                    const double radius = rng.pareto(d.alpha);
                    for (Eigen::Index i = 0; i < dim; ++i) out(r, i) = rng.sign() * out(r, i) / total * radius;
                }
                return out;
            } else if constexpr (std::is_same_v<D, ExchangeableSpectral>) {
                const auto dim = static_cast<Eigen::Index>(d.dimension);
                MatrixXd out(n * dim, dim);
                VectorXd base(dim);
                for (Eigen::Index b = 0; b < n; ++b) {
                    for (Eigen::Index i = 0; i < dim; ++i) base[i] = rng.normal();
                    base /= base.lpNorm<1>();
                    for (Eigen::Index s = 0; s < dim; ++s) {
                        for (Eigen::Index i = 0; i < dim; ++i) out(b * dim + s, i) = base[(i + s) % dim];
                    }
                }
                return out;
            } else {
                fail(ErrorCode::InvalidSpec, "alpha-stable sampling is unsupported");
            }
        },
        spec.distribution);
}

/// n i.i.d. Pareto(alpha) radii on [1, inf).
inline std::vector<double> pareto_radii(std::size_t n, double alpha, std::uint64_t seed) {
    if (!(alpha > 0.0)) fail(ErrorCode::InvalidSpec, "tail index must be positive");
    CounterRng rng(seed);
    std::vector<double> out(n);
    for (auto& r : out) r = rng.pareto(alpha);
    return out;
}

/// Weekday labels starting at first (YYYY-MM-DD), one per row.
inline std::vector<std::string> business_dates(std::size_t count, const std::string& first = "2000-01-03") {
    using namespace std::chrono;
    const std::string start = parse_iso_date(first);
    sys_days cursor = year_month_day{year{std::stoi(start.substr(0, 4))}, month{static_cast<unsigned>(std::stoi(start.substr(5, 2)))},
                                  std::chrono::day{static_cast<unsigned>(std::stoi(start.substr(8, 2)))}};
    std::vector<std::string> out;
    out.reserve(count);
    while (out.size() < count) {
        const weekday wd{cursor};
        if (wd != Saturday && wd != Sunday) {
            const year_month_day ymd{cursor};
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
            out.emplace_back(buf);
        }
        cursor += days{1};
    }
    return out;
}

/// Price panel whose log losses are the given rows: S(0) = start_price and
/// S(t) = S(t-1) * exp(-X(t)). Tickers default to S1..SN.
inline PricePanel panel_from_log_losses(const MatrixXd& log_losses, std::vector<std::string> tickers = {},
                                        double start_price = 100.0, const std::string& first_date = "2000-01-03") {
    const Eigen::Index n = log_losses.cols();
    if (tickers.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) tickers.push_back("S" + std::to_string(i + 1));
    }
    MatrixXd prices(log_losses.rows() + 1, n);
    prices.row(0).setConstant(start_price);
    for (Eigen::Index t = 0; t < log_losses.rows(); ++t) {
        prices.row(t + 1) = prices.row(t).array() * (-log_losses.row(t).array()).exp();
    }
    auto dates = business_dates(static_cast<std::size_t>(prices.rows()), first_date);
    return PricePanel(std::move(dates), std::move(tickers), std::move(prices));
}

struct GridMinimum {
    Weights weights;
    double gamma = 0.0;
    std::size_t evaluations = 0;
};

/// Exhaustive minimum of eri_value over the simplex lattice with the given
/// step (1/step must be an integer up to rounding). Limited to N <= 4.
inline GridMinimum brute_force_eri_min(const TailEstimate& tail, double grid_step) {
    const auto n = tail.dimension();
    if (n > 4) fail(ErrorCode::DimensionTooLarge, "grid search is limited to 4 assets");
    if (n == 0) fail(ErrorCode::InvalidSpec, "empty spectral sample");
    if (!(grid_step > 0.0 && grid_step <= 1.0)) fail(ErrorCode::InvalidSpec, "grid step must lie in (0,1]");
    const auto m = static_cast<int>(std::llround(1.0 / grid_step));

    GridMinimum best;
    best.gamma = std::numeric_limits<double>::infinity();
    VectorXd best_w;
    VectorXd w(static_cast<Eigen::Index>(n));
    std::vector<int> counts(n, 0);

    // Enumerate compositions of m into n non-negative parts.
    std::function<void(std::size_t, int)> recurse = [&](std::size_t i, int remaining) {
        if (i + 1 == n) {
            counts[i] = remaining;
            for (std::size_t j = 0; j < n; ++j) w[static_cast<Eigen::Index>(j)] = counts[j] / static_cast<double>(m);
            const double g = eri_functional(w, tail);
            ++best.evaluations;
            if (g < best.gamma) {
                best.gamma = g;
                best_w = w;
            }
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[i] = c;
            recurse(i + 1, remaining - c);
        }
    };
    recurse(0, m);
    best.weights = Weights::normalized(best_w);
    return best;
}

struct VarRatioCheck {
    double empirical = 0.0;  // VaR(v^T X) / VaR(w^T X) from sample quantiles
    double predicted = 0.0;  // (gamma_v / gamma_w)^(1/alpha) from the plug-in ERI
};

/// Compares the empirical VaR ratio of two portfolios with the ratio implied
/// by the extreme risk index. The spectral sample is the angular part of the
/// tail_fraction largest-radius rows; alpha is supplied by the caller.
inline VarRatioCheck check_var_ratio(const MatrixXd& samples, const Weights& v, const Weights& w, double level,
                                     double alpha, double tail_fraction = 0.10) {
    if (static_cast<Eigen::Index>(v.size()) != samples.cols() || static_cast<Eigen::Index>(w.size()) != samples.cols()) {
        fail(ErrorCode::DimensionMismatch, "portfolios do not match the sample dimension");
    }
    const VectorXd lv = samples * v.values();
    const VectorXd lw = samples * w.values();
    VarRatioCheck out;
    out.empirical = var_quantile(std::span<const double>(lv.data(), static_cast<std::size_t>(lv.size())), level) /
                    var_quantile(std::span<const double>(lw.data(), static_cast<std::size_t>(lw.size())), level);
    TailEstimate tail = estimate_tail(samples, StaticFraction{tail_fraction});
    tail.alpha_hat = alpha;
    out.predicted = std::pow(eri_value(v, tail) / eri_value(w, tail), 1.0 / alpha);
    return out;
}

/// P(R > r s) / P(R > r) from a sample.
inline double tail_probability_ratio(std::span<const double> radii, double r, double s) {
    std::size_t above_r = 0;
    std::size_t above_rs = 0;
    for (double x : radii) {
        if (x > r) ++above_r;
        if (x > r * s) ++above_rs;
    }
    if (above_r == 0) fail(ErrorCode::EmptyTail, "no observations above the threshold");
    return static_cast<double>(above_rs) / static_cast<double>(above_r);
}

/// Flag-level description of a synthetic price panel.
struct SyntheticPanelSpec {
    std::string distribution = "t";  // "t", "pareto" or "stable"
    double nu = 3.0;                 // t degrees of freedom
    double alpha = 3.0;              // Pareto tail index
    std::size_t assets = 3;
    std::size_t observations = 2000; // return periods; the panel has one more date
    double scale = 0.01;             // daily loss scale
    double correlation = 0.0;        // equicorrelation of the t scale matrix
    std::uint64_t seed = 0;
};

inline SyntheticSpec to_sample_spec(const SyntheticPanelSpec& p) {
    if (p.assets == 0) fail(ErrorCode::InvalidSpec, "synthetic panel needs at least one asset");
    if (!(p.scale > 0.0)) fail(ErrorCode::InvalidSpec, "scale must be positive");
    SyntheticSpec spec;
    spec.n = p.observations;
    spec.seed = p.seed;
    if (p.distribution == "t") {
        if (!(p.correlation > -1.0 / std::max<double>(1.0, static_cast<double>(p.assets) - 1.0) - 1e-15 && p.correlation < 1.0)) {
            fail(ErrorCode::InvalidSpec, "correlation does not give a positive semidefinite scale matrix");
        }
        const auto n = static_cast<Eigen::Index>(p.assets);
        MatrixXd scale = MatrixXd::Constant(n, n, p.correlation);
        scale.diagonal().setOnes();
        spec.distribution = MultivariateT{p.nu, scale * (p.scale * p.scale)};
    } else if (p.distribution == "pareto") {
        spec.distribution = ParetoRadialUniformAngle{p.alpha, p.assets};
    } else if (p.distribution == "stable") {
        spec.distribution = AlphaStable{p.alpha, p.assets};
    } else {
        fail(ErrorCode::InvalidSpec, "unknown synthetic distribution '" + p.distribution + "' (expected t or pareto)");
    }
    return spec;
}

inline PricePanel synthetic_panel(const SyntheticPanelSpec& p) {
    MatrixXd losses = sample(to_sample_spec(p));
    if (p.distribution == "pareto") losses *= p.scale;
    return panel_from_log_losses(losses);
}

}  // namespace eri
