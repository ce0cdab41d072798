#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "eri/synthetic.hpp"

using namespace eri;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SyntheticSpec t_spec(double nu, MatrixXd scale, std::size_t n, std::uint64_t seed) {
    SyntheticSpec s;
    s.distribution = MultivariateT{nu, std::move(scale)};
    s.n = n;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("counter generator is reproducible and position based") {
    CounterRng a(42, 1);
    CounterRng b(42, 1);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    CounterRng c(42, 1);
    CHECK(c.at(5) == CounterRng(42, 1).at(5));
    c.discard(5);
    CHECK(c() == CounterRng(42, 1).at(5));
    CHECK(CounterRng(42, 2).at(0) != CounterRng(42, 1).at(0));
    CHECK(CounterRng(43, 1).at(0) != CounterRng(42, 1).at(0));
}

TEST_CASE("uniform, gamma and Pareto sanity") {
    CounterRng rng(1);
    double su = 0.0, sg = 0.0, sg_small = 0.0;
    const int n = 200000;
    std::size_t above = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK((u > 0.0 && u < 1.0));
        su += u;
        sg += rng.gamma(2.5);
        sg_small += rng.gamma(0.5);
        if (rng.pareto(2.0) > 3.0) ++above;
    }
    CHECK_THAT(su / n, WithinAbs(0.5, 0.005));
    CHECK_THAT(sg / n, WithinAbs(2.5, 0.02));
    CHECK_THAT(sg_small / n, WithinAbs(0.5, 0.01));
    CHECK_THAT(double(above) / n, WithinAbs(1.0 / 9.0, 0.003));
}

TEST_CASE("same seed gives identical samples") {
    const auto s = t_spec(3.0, MatrixXd::Identity(3, 3), 500, 17);
    CHECK(sample(s) == sample(s));
    auto other = s;
    other.seed = 18;
    CHECK(sample(s) != sample(other));
}

TEST_CASE("large degrees of freedom approach the Gaussian scale") {
    MatrixXd scale(2, 2);
    scale << 1.0, 0.4, 0.4, 2.0;
    const MatrixXd x = sample(t_spec(1e6, scale, 100000, 3));
    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    const MatrixXd cov = centered.transpose() * centered / double(x.rows() - 1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(cov(i, j) - scale(i, j)) <= 0.02 * scale.cwiseAbs().maxCoeff());
}

TEST_CASE("univariate t(3) tail index") {
    const MatrixXd x = sample(t_spec(3.0, MatrixXd::Identity(1, 1), 100000, 5));
    const VectorXd col = x.col(0);
    const double a = per_stock_alpha(col, StaticFraction{0.01});
    CHECK(a >= 2.7);
    CHECK(a <= 3.3);
}

TEST_CASE("exchangeable t is permutation symmetric in its tails") {
    MatrixXd scale = MatrixXd::Constant(3, 3, 0.3);
    scale.diagonal().setOnes();
    const MatrixXd x = sample(t_spec(3.0, scale, 100000, 6));
    std::vector<double> a;
    for (int c = 0; c < 3; ++c) a.push_back(per_stock_alpha(VectorXd(x.col(c)), StaticFraction{0.01}));
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    // standard error alpha / sqrt(k) is about 0.1 at k = 1000
    CHECK(*hi - *lo < 0.4);
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(validate(t_spec(0.0, MatrixXd::Identity(2, 2), 10, 1)), Error);
    MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(validate(t_spec(3.0, bad, 10, 1)), Error);
    CHECK_THROWS_AS(validate(t_spec(3.0, MatrixXd::Identity(2, 2), 0, 1)), Error);
    SyntheticSpec stable;
    stable.distribution = AlphaStable{};
    stable.n = 10;
    try {
        sample(stable);
        FAIL("expected unsupported");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidSpec);
        CHECK(std::string(e.what()).find("unsupported") != std::string::npos);
    }
}

TEST_CASE("Pareto radial sample has L1 radius Pareto") {
    SyntheticSpec s;
    s.distribution = ParetoRadialUniformAngle{2.0, 3};
    s.n = 100000;
    s.seed = 4;
    const MatrixXd x = sample(s);
    std::vector<double> r(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) r[static_cast<std::size_t>(i)] = x.row(i).lpNorm<1>();
    CHECK(*std::min_element(r.begin(), r.end()) >= 1.0 - 1e-12);
    CHECK_THAT(hill_estimate(r, 10000), WithinAbs(2.0, 0.1));
    // signs are symmetric
    CHECK_THAT(double((x.col(0).array() > 0).count()) / double(x.rows()), WithinAbs(0.5, 0.01));
}

TEST_CASE("scaling law of Pareto radii") {
    const auto r = pareto_radii(1000000, 2.0, 9);
    std::vector<double> sorted(r);
    std::nth_element(sorted.begin(), sorted.begin() + 950000, sorted.end());
    const double q95 = sorted[950000];
    for (double s : {2.0, 4.0}) CHECK_THAT(tail_probability_ratio(r, q95, s), WithinRel(std::pow(s, -2.0), 0.10));
}

TEST_CASE("grid oracle") {
    MatrixXd one = MatrixXd::Ones(4, 1);
    const auto tail1 = TailEstimate::from_spectral(one, 2.0);
    const auto g1 = brute_force_eri_min(tail1, 0.01);
    CHECK(g1.weights[0] == 1.0);
    CHECK(g1.gamma == eri_value(Weights::equal(1), tail1));

    MatrixXd z(30, 2);
    CounterRng rng(7);
    for (int r = 0; r < 30; ++r) z.row(r) << rng.normal() + 0.2, rng.normal();
    const auto tail2 = TailEstimate::from_spectral(z, 2.5);
    const auto g2 = brute_force_eri_min(tail2, 0.01);
    CHECK(g2.evaluations == 101);
    double best = 1e300;
    for (int i = 0; i <= 100; ++i) best = std::min(best, eri_functional(Eigen::Vector2d(i / 100.0, 1 - i / 100.0), tail2));
    CHECK(g2.gamma == best);

    MatrixXd z3(50, 3);
    for (int r = 0; r < 50; ++r) z3.row(r) << rng.normal(), rng.normal() + 0.1, rng.normal();
    const auto tail3 = TailEstimate::from_spectral(z3, 2.0);
    CHECK_THAT(brute_force_eri_min(tail3, 0.01).gamma, WithinAbs(minimize_eri(tail3, 3).gamma, 1e-3));

    CHECK_THROWS_AS(brute_force_eri_min(TailEstimate::from_spectral(MatrixXd::Ones(3, 5), 2.0), 0.1), Error);
}

TEST_CASE("VaR ratio of a portfolio with itself") {
    const MatrixXd x = sample(t_spec(3.0, MatrixXd::Identity(2, 2), 20000, 2));
    const Weights h = Weights::equal(2);
    const auto c = check_var_ratio(x, h, h, 0.99, 3.0);
    CHECK(c.empirical == 1.0);
    CHECK(c.predicted == 1.0);
}

TEST_CASE("VaR ratio law for bivariate t(3)") {
    const MatrixXd x = sample(t_spec(3.0, MatrixXd::Identity(2, 2), 1000000, 8));
    const Weights v(Eigen::Vector2d(1, 0));
    const Weights w = Weights::equal(2);
    const auto c = check_var_ratio(x, v, w, 0.99, 3.0);
    CHECK_THAT(c.predicted, WithinRel(c.empirical, 0.15));
    const auto scaled = check_var_ratio(4.0 * x, v, w, 0.99, 3.0);
    CHECK_THAT(scaled.empirical, WithinRel(c.empirical, 1e-12));
    CHECK_THAT(scaled.predicted, WithinRel(c.predicted, 1e-12));
}

TEST_CASE("synthetic panel") {
    SyntheticPanelSpec p;
    p.assets = 2;
    p.observations = 2000;
    p.seed = 5;
    const auto panel = synthetic_panel(p);
    CHECK(panel.num_dates() == 2001);
    CHECK(panel.tickers() == std::vector<std::string>{"S1", "S2"});
    CHECK(panel.dates().front() == "2000-01-03");
    CHECK(panel.dates()[5] == "2000-01-10");
    const auto l = compute_losses(panel);
    MatrixXd scale = MatrixXd::Identity(2, 2) * 1e-4;
    SyntheticSpec s = t_spec(3.0, scale, 2000, 5);
    CHECK((l.log_losses - sample(s)).cwiseAbs().maxCoeff() < 1e-10);
    p.distribution = "stable";
    CHECK_THROWS_AS(synthetic_panel(p), Error);
    p.distribution = "cauchy";
    CHECK_THROWS_AS(synthetic_panel(p), Error);
}
