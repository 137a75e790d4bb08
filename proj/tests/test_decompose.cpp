#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "ubayes/decompose.hpp"

using namespace ubayes;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kE = std::numbers::e;

ParamFunction on_grid(const ModelSpace& model, double (*f)(double)) {
    Vector v(model.param_count());
    for (Index i = 0; i < v.size(); ++i) v[i] = f(model.grid().nodes()[i]);
    return ParamFunction(std::move(v));
}

}  // namespace

TEST_CASE("splitting one minus theta squared against a Bernoulli draw") {
    const ModelSpace model = builtin_model("bernoulli", 64);
    const ParamFunction gamma = on_grid(model, [](double t) { return 1.0 - t * t; });
    const ParamDecomp d = decompose_param(gamma, model);

    for (Index i = 0; i < model.param_count(); ++i) {
        const double t = model.grid().nodes()[i];
        CHECK_THAT(d.part_in_range[i], WithinAbs(7.0 / 6.0 - t, 1e-12));
        CHECK_THAT(d.part_in_null[i], WithinAbs(-1.0 / 6.0 + t - t * t, 1e-12));
    }
    CHECK(d.pythagoras_residual <= 1e-14);
    CHECK_THAT(inner_pi(d.part_in_null, d.part_in_null, model), WithinAbs(1.0 / 180.0, 1e-14));
    // an independent quadrature oracle for the same norm
    const double oracle = testsupport::simpson_01([](double t) {
        const double r = -1.0 / 6.0 + t - t * t;
        return r * r;
    });
    CHECK_THAT(inner_pi(d.part_in_null, d.part_in_null, model), WithinAbs(oracle, 1e-10));
}

TEST_CASE("splitting the exponential against a Bernoulli draw") {
    const ModelSpace model = builtin_model("bernoulli", 64);
    const ParamFunction gamma = on_grid(model, [](double t) { return std::exp(t); });
    const ParamDecomp d = decompose_param(gamma, model);

    for (Index i = 0; i < model.param_count(); ++i) {
        const double t = model.grid().nodes()[i];
        CHECK_THAT(d.part_in_range[i], WithinAbs((4.0 * kE - 10.0) + (18.0 - 6.0 * kE) * t, 1e-10));
    }
    SECTION("the posterior transform ignores the null part") {
        const SampleFunction direct = apply_B(gamma, model);
        const SampleFunction of_range = apply_B(d.part_in_range, model);
        CHECK((direct.values - of_range.values).cwiseAbs().maxCoeff() <= 1e-12);
        const SampleFunction of_null = apply_B(d.part_in_null, model);
        CHECK(of_null.values.cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("parameter-side split is an orthogonal reconstruction on random models") {
    Xoshiro256 rng(314);
    for (int trial = 0; trial < 25; ++trial) {
        const Index K = 5 + trial;
        const Index N = 2 + trial % 6;
        const ModelSpace model = testsupport::random_model(9000 + trial, K, N);
        const ParamFunction gamma(testsupport::random_vector(rng, K));
        const ParamDecomp d = decompose_param(gamma, model);

        CHECK((gamma.values - d.part_in_range.values - d.part_in_null.values)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
        CHECK(std::abs(inner_pi(d.part_in_range, d.part_in_null, model)) <= 1e-12);
        const double whole = inner_pi(gamma, gamma, model);
        CHECK(d.pythagoras_residual <= 1e-10 * (1.0 + whole));
    }
}

TEST_CASE("sample-side split separates Bayes estimators from unbiased zeros") {
    Xoshiro256 rng(2718);
    for (int trial = 0; trial < 25; ++trial) {
        const Index K = 6 + trial;
        const Index N = 3 + trial % 5;
        const ModelSpace model = testsupport::random_model(4000 + trial, K, N);
        const SampleFunction delta(testsupport::random_vector(rng, N));
        const SampleDecomp d = decompose_sample(delta, model);

        CHECK((delta.values - d.part_in_range.values - d.part_in_null.values)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
        CHECK(std::abs(inner_m(d.part_in_range, d.part_in_null, model)) <= 1e-12);
        // the null part is an unbiased estimator of zero
        CHECK(apply_U(d.part_in_null, model).values.cwiseAbs().maxCoeff() <= 1e-10);
        // the range part is a posterior mean
        const SubspaceBasis range_b = range_basis_B(model);
        CHECK(projection_residual(range_b, d.part_in_range.values, model) <= 1e-10);
    }
}

TEST_CASE("minimum-norm unbiased estimator on the three-outcome model") {
    const ModelSpace model = builtin_model("example1", 64);
    const ParamFunction gamma(model.grid().nodes());
    const SampleFunction delta = solve_unbiased(gamma, model);
    REQUIRE(delta.size() == 3);
    CHECK_THAT(delta[0], WithinAbs(0.5, 1e-10));
    CHECK_THAT(delta[1], WithinAbs(-2.5, 1e-10));
    CHECK_THAT(delta[2], WithinAbs(1.5, 1e-10));

    SECTION("it is unbiased") {
        const ParamFunction expect = apply_U(delta, model);
        CHECK((expect.values - gamma.values).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SECTION("it is orthogonal to the unbiased zeros") {
        Vector killer(3);
        killer << 1.0, -1.0, -1.0;
        CHECK(std::abs(inner_m(delta, SampleFunction(killer), model)) <= 1e-12);
    }
    SECTION("any other unbiased estimator has larger norm") {
        Vector killer(3);
        killer << 1.0, -1.0, -1.0;
        for (double c : {-1.0, 0.1, 2.0}) {
            const SampleFunction other(Vector(delta.values + c * killer));
            CHECK(norm_m(other, model) > norm_m(delta, model));
        }
    }
}

TEST_CASE("non-estimable targets are refused with the nearest estimable function") {
    const ModelSpace model = builtin_model("bernoulli", 64);
    Vector v(model.param_count());
    for (Index i = 0; i < v.size(); ++i) {
        const double t = model.grid().nodes()[i];
        v[i] = 1.0 - t * t;
    }
    try {
        solve_unbiased(ParamFunction(v), model);
        FAIL("expected NotEstimable");
    } catch (const NotEstimable& e) {
        CHECK(std::string(e.name()) == "NotEstimable");
        CHECK_THAT(e.residual_norm, WithinAbs(std::sqrt(1.0 / 180.0), 1e-10));
        for (Index i = 0; i < model.param_count(); ++i)
            CHECK_THAT(e.nearest_estimable[i],
                       WithinAbs(7.0 / 6.0 - model.grid().nodes()[i], 1e-10));
    }
}

TEST_CASE("solving for a known expectation function round-trips") {
    Xoshiro256 rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        const ModelSpace model = testsupport::random_model(600 + trial, 12, 5);
        const SampleFunction seed_delta(testsupport::random_vector(rng, 5));
        const ParamFunction target = apply_U(seed_delta, model);
        const SampleFunction solved = solve_unbiased(target, model);
        const ParamFunction reached = apply_U(solved, model);
        CHECK((reached.values - target.values).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(norm_m(solved, model) <= norm_m(seed_delta, model) + 1e-12);
    }
}

TEST_CASE("solver tolerance validation") {
    const ModelSpace model = testsupport::random_model(1, 6, 3);
    const ParamFunction gamma(Vector::Ones(6));
    CHECK_THROWS_AS(solve_unbiased(gamma, model, -1.0), BadTolerance);
    CHECK_THROWS_AS(solve_unbiased(gamma, model, 1e-8, 1.0), BadTolerance);
    CHECK_THROWS_AS(decompose_param(gamma, model, -1.0), BadTolerance);
}
