#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "test_support.hpp"
#include "ubayes/consistency.hpp"

using namespace ubayes;
using Catch::Matchers::WithinAbs;

TEST_CASE("splitmix64 matches the reference stream") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xE220A8397B1DCDAFull);
    CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ull);
    CHECK(splitmix64(state) == 0x06C45D188009454Full);
}

TEST_CASE("xoshiro256** uniforms are deterministic and in range") {
    Xoshiro256 a(123), b(123), c(124);
    bool all_equal = true;
    bool any_differ = false;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        all_equal = all_equal && (x == b.uniform());
        any_differ = any_differ || (x != c.uniform());
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("substream seeds separate replications") {
    CHECK(substream_seed(42, 4, 0) != substream_seed(42, 4, 1));
    CHECK(substream_seed(42, 4, 0) != substream_seed(42, 5, 0));
    CHECK(substream_seed(42, 4, 7) == substream_seed(42, 4, 7));
}

TEST_CASE("exact table matches the conjugate-posterior oracles") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(64);
    const ParamFunction gamma(grid.nodes());
    const auto rows = exact_consistency_table(grid, gamma, 50);
    REQUIRE(rows.size() == 50);

    for (const auto& row : rows) {
        const double n = row.n;
        CHECK_THAT(row.risk_Un, WithinAbs(1.0 / (6.0 * n), 1e-12));
        CHECK_THAT(row.risk_bayes, WithinAbs(1.0 / (6.0 * (n + 2.0)), 1e-12));
        CHECK_THAT(row.cross_norm, WithinAbs(1.0 / (3.0 * n * (n + 2.0)), 1e-12));
        CHECK_THAT(row.tau_over_n, WithinAbs(1.0 / (6.0 * n), 1e-12));
        CHECK(std::abs(row.risk_Un - row.risk_bayes - row.cross_norm) <=
              1e-12 * (1.0 + row.risk_Un));
        CHECK(row.risk_bayes <= row.risk_Un);
        CHECK(row.cross_norm * n * n <= 1.0 / 3.0 + 1e-9);
        CHECK_FALSE(row.monte_carlo);
    }
    SECTION("rows decrease in n") {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].risk_bayes < rows[i - 1].risk_bayes);
            CHECK(rows[i].cross_norm < rows[i - 1].cross_norm);
        }
    }
    SECTION("size one is the posterior mean (1/3, 2/3)") {
        const ModelSpace bernoulli = binomial_model(grid, 1);
        const SampleFunction bayes = apply_B(gamma, bernoulli);
        CHECK_THAT(bayes[0], WithinAbs(1.0 / 3.0, 1e-12));
        CHECK_THAT(bayes[1], WithinAbs(2.0 / 3.0, 1e-12));
        CHECK_THAT(rows[0].risk_bayes, WithinAbs(1.0 / 18.0, 1e-12));
    }
}

TEST_CASE("exact table rejects out-of-range sizes and non-estimable targets") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(32);
    const ParamFunction gamma(grid.nodes());
    CHECK_THROWS_AS(exact_consistency_table(grid, gamma, 65), NMaxTooLarge);
    CHECK_THROWS_AS(exact_consistency_table(grid, gamma, 0), BadSpec);

    // a quadratic cannot be estimated from one Bernoulli draw
    Vector quad = grid.nodes().array().square();
    CHECK_THROWS_AS(exact_consistency_table(grid, ParamFunction(quad), 5), NotEstimable);
}

TEST_CASE("an affine target with nonzero intercept keeps the split identity") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(48);
    Vector v = 2.0 * grid.nodes().array() - 0.5;
    const auto rows = exact_consistency_table(grid, ParamFunction(v), 10);
    for (const auto& row : rows) {
        CHECK(std::abs(row.risk_Un - row.risk_bayes - row.cross_norm) <=
              1e-12 * (1.0 + row.risk_Un));
        // scaling the target by 2 scales every quadratic quantity by 4
        CHECK_THAT(row.risk_Un, WithinAbs(4.0 / (6.0 * row.n), 1e-12));
    }
}

TEST_CASE("Monte Carlo estimates agree with the exact table") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(64);
    const ParamFunction gamma(grid.nodes());
    const std::vector<int> sizes = {4, 16};
    const auto mc = monte_carlo_consistency(grid, gamma, sizes, 20000, 42);

    REQUIRE(mc.size() == 2);
    for (const auto& row : mc) {
        CHECK(row.monte_carlo);
        const double n = row.n;
        CHECK(std::abs(row.risk_Un - 1.0 / (6.0 * n)) <= 4.0 * row.se_risk_Un);
        CHECK(std::abs(row.risk_bayes - 1.0 / (6.0 * (n + 2.0))) <= 4.0 * row.se_risk_bayes);
        CHECK(std::abs(row.cross_norm - 1.0 / (3.0 * n * (n + 2.0))) <= 4.0 * row.se_cross_norm);
        CHECK(row.se_risk_Un > 0.0);
    }
}

TEST_CASE("Monte Carlo results are bit-identical across thread counts") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(32);
    const ParamFunction gamma(grid.nodes());
    const std::vector<int> sizes = {4, 16};
    const auto one = monte_carlo_consistency(grid, gamma, sizes, 5000, 7, 1);
    const auto four = monte_carlo_consistency(grid, gamma, sizes, 5000, 7, 4);
    const auto three = monte_carlo_consistency(grid, gamma, sizes, 5000, 7, 3);

    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].risk_Un == four[i].risk_Un);
        CHECK(one[i].risk_bayes == four[i].risk_bayes);
        CHECK(one[i].cross_norm == four[i].cross_norm);
        CHECK(one[i].se_cross_norm == four[i].se_cross_norm);
        CHECK(one[i].risk_Un == three[i].risk_Un);
    }
}

TEST_CASE("two seeds agree within combined statistical error") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(32);
    const ParamFunction gamma(grid.nodes());
    const std::vector<int> sizes = {8};
    const auto a = monte_carlo_consistency(grid, gamma, sizes, 20000, 1);
    const auto b = monte_carlo_consistency(grid, gamma, sizes, 20000, 2);
    const double combined =
        std::sqrt(a[0].se_cross_norm * a[0].se_cross_norm + b[0].se_cross_norm * b[0].se_cross_norm);
    CHECK(std::abs(a[0].cross_norm - b[0].cross_norm) <= 5.0 * combined);
}

TEST_CASE("a constant target has zero discrepancy everywhere") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(32);
    const ParamFunction gamma(Vector::Constant(32, 3.25));
    const auto exact = exact_consistency_table(grid, gamma, 5);
    for (const auto& row : exact) {
        CHECK(row.risk_Un <= 1e-20);
        CHECK(row.risk_bayes <= 1e-20);
        CHECK(row.cross_norm <= 1e-20);
    }
    const auto mc = monte_carlo_consistency(grid, gamma, {3}, 1000, 9);
    CHECK(mc[0].risk_Un <= 1e-20);
    CHECK(mc[0].cross_norm <= 1e-20);
}

TEST_CASE("Monte Carlo input validation") {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(16);
    const ParamFunction gamma(grid.nodes());
    CHECK_THROWS_AS(monte_carlo_consistency(grid, gamma, {70}, 1000, 1), NMaxTooLarge);
    CHECK_THROWS_AS(monte_carlo_consistency(grid, gamma, {4}, 0, 1), BadSpec);
    CHECK_THROWS_AS(monte_carlo_consistency(grid, ParamFunction(Vector::Ones(4)), {4}, 1000, 1),
                    LengthMismatch);
}
