#include <catch2/catch_amalgamated.hpp>

#include "eri/mv_optimizer.hpp"
#include "eri/random.hpp"

using namespace eri;
using Catch::Matchers::WithinAbs;

namespace {

CovarianceEstimate cov_of(const MatrixXd& m) {
    CovarianceEstimate c;
    c.matrix = m;
    c.window_len = 100;
    return c;
}

MatrixXd random_spd(std::uint64_t seed, int n) {
    CounterRng rng(seed);
    MatrixXd a(n + 2, n);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    return a.transpose() * a / double(n);
}

}  // namespace

TEST_CASE("covariance of duplicated columns is rank one") {
    CounterRng rng(1);
    MatrixXd x(50, 2);
    for (int r = 0; r < 50; ++r) x(r, 0) = x(r, 1) = rng.normal();
    const auto c = empirical_covariance(x);
    CHECK_THAT(c.matrix(0, 0), WithinAbs(c.matrix(0, 1), 1e-14));
    CHECK_THAT(c.matrix(1, 1), WithinAbs(c.matrix(0, 1), 1e-14));
    CHECK(c.window_len == 50);
}

TEST_CASE("covariance uses the n-1 divisor") {
    MatrixXd x(3, 1);
    x << 1, 2, 3;
    CHECK_THAT(empirical_covariance(x).matrix(0, 0), WithinAbs(1.0, 1e-15));
}

TEST_CASE("covariance of independent normals") {
    CounterRng rng(2);
    MatrixXd x(100000, 3);
    for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c < 3; ++c) x(r, c) = rng.normal();
    const auto c = empirical_covariance(x);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK_THAT(c.matrix(i, j), WithinAbs(i == j ? 1.0 : 0.0, 0.02));
    }
    CHECK((c.matrix - c.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("ridge adds to the diagonal") {
    CounterRng rng(3);
    MatrixXd x(40, 3);
    for (int r = 0; r < 40; ++r)
        for (int c = 0; c < 3; ++c) x(r, c) = rng.normal();
    const auto plain = empirical_covariance(x);
    const auto ridged = empirical_covariance(x, 0.01);
    CHECK(ridged.ridge == 0.01);
    MatrixXd diff = ridged.matrix - plain.matrix;
    CHECK(diff.isApprox(0.01 * MatrixXd::Identity(3, 3), 1e-12));
    CHECK_THROWS_AS(empirical_covariance(x, -1.0), Error);
    CHECK_THROWS_AS(empirical_covariance(x.topRows(1)), Error);
}

TEST_CASE("minimum variance closed forms") {
    const auto eye = minimize_variance(cov_of(MatrixXd::Identity(4, 4)));
    for (int i = 0; i < 4; ++i) CHECK_THAT(eye.weights[i], WithinAbs(0.25, 1e-12));

    MatrixXd d(2, 2);
    d << 1, 0, 0, 4;
    const auto diag = minimize_variance(cov_of(d));
    CHECK_THAT(diag.weights[0], WithinAbs(0.8, 1e-8));
    CHECK_THAT(diag.weights[1], WithinAbs(0.2, 1e-8));
    CHECK(diag.converged);

    MatrixXd rho(2, 2);
    rho << 1, 0.5, 0.5, 1;
    const auto sym = minimize_variance(cov_of(rho));
    CHECK_THAT(sym.weights[0], WithinAbs(0.5, 1e-8));
    CHECK_THAT(sym.weights[1], WithinAbs(0.5, 1e-8));
}

TEST_CASE("long-only constraint binds") {
    // unconstrained optimum would short asset 2
    MatrixXd c(2, 2);
    c << 1, 1.2, 1.2, 4;
    const auto sol = minimize_variance(cov_of(c));
    CHECK(sol.weights[0] == 1.0);
    CHECK(sol.weights[1] == 0.0);
}

TEST_CASE("minimum variance is scale invariant") {
    const MatrixXd c = random_spd(5, 5);
    const auto a = minimize_variance(cov_of(c));
    const auto b = minimize_variance(cov_of(37.0 * c));
    for (int i = 0; i < 5; ++i) CHECK_THAT(a.weights[i], WithinAbs(b.weights[i], 1e-8));
}

TEST_CASE("minimum variance matches a lattice search") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const MatrixXd c = random_spd(100 + s, 3);
        const auto sol = minimize_variance(cov_of(c));
        double best = 1e300;
        const int steps = 400;
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; i + j <= steps; ++j) {
                const Eigen::Vector3d w(i / double(steps), j / double(steps), (steps - i - j) / double(steps));
                best = std::min(best, w.dot(c * w));
            }
        }
        CHECK(sol.variance <= best + 1e-12);
        // a lattice point lies within sqrt(3)/steps of the optimum on its face
        const double lambda_max = Eigen::SelfAdjointEigenSolver<MatrixXd>(c).eigenvalues().maxCoeff();
        CHECK(best - sol.variance <= 3.0 * lambda_max / (steps * steps));
        CHECK(sol.variance <= Weights::equal(3).values().dot(c * Weights::equal(3).values()) + 1e-15);
    }
}

TEST_CASE("ridge raises the minimum by at least eps times the squared norm") {
    const MatrixXd c = random_spd(8, 4);
    const double eps = 0.05;
    const auto base = minimize_variance(cov_of(c));
    const auto ridged = minimize_variance(cov_of(c + eps * MatrixXd::Identity(4, 4)));
    CHECK(ridged.variance >= base.variance + eps * ridged.weights.values().squaredNorm() - 1e-12);
}
