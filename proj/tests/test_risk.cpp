#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "ubayes/risk.hpp"

using namespace ubayes;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kE = std::numbers::e;
}

TEST_CASE("posterior-mean risk for the exponential under a Bernoulli draw") {
    const ModelSpace model = builtin_model("bernoulli", 64);
    Vector g(model.param_count());
    for (Index i = 0; i < g.size(); ++i) g[i] = std::exp(model.grid().nodes()[i]);
    const ParamFunction gamma(std::move(g));

    const RiskReport report = projection_risk_split(gamma, model);

    const double risk_full = (16.0 * kE - 3.0 * kE * kE - 21.0) / 2.0;
    const double risk_projection = 2.0 * kE * kE - 12.0 * kE + 18.0;
    const double gap = 20.0 * kE - 3.5 * kE * kE - 28.5;

    CHECK_THAT(report.direct_risk, WithinAbs(risk_full, 1e-12));
    CHECK_THAT(report.bias_identity_risk, WithinAbs(risk_full, 1e-12));
    CHECK_THAT(report.projection_risk, WithinAbs(risk_projection, 1e-12));
    CHECK_THAT(report.excess_over_projection, WithinAbs(gap, 1e-12));
    CHECK(report.projection_risk < report.direct_risk);

    SECTION("the bias function is gamma minus the expectation of its posterior mean") {
        // U(B(exp))(t) = (1-t) 2(e-2) + 2t = 2(e-2) + (6-2e) t
        for (Index i = 0; i < model.param_count(); ++i) {
            const double t = model.grid().nodes()[i];
            const double bias = std::exp(t) - 2.0 * (kE - 2.0) - (6.0 - 2.0 * kE) * t;
            CHECK_THAT(report.bias_fn[i], WithinAbs(bias, 1e-10));
        }
    }
}

TEST_CASE("risk of the posterior mean of theta under a Bernoulli draw") {
    const ModelSpace model = builtin_model("bernoulli", 64);
    const ParamFunction gamma(model.grid().nodes());
    const SampleFunction bayes = apply_B(gamma, model);
    CHECK_THAT(bayes[0], WithinAbs(1.0 / 3.0, 1e-13));
    CHECK_THAT(bayes[1], WithinAbs(2.0 / 3.0, 1e-13));
    CHECK_THAT(bayes_risk(bayes, gamma, model), WithinAbs(1.0 / 18.0, 1e-13));

    SECTION("bias route agrees") {
        const RiskReport report = risk_via_bias(gamma, model);
        CHECK_THAT(report.bias_identity_risk, WithinAbs(1.0 / 18.0, 1e-13));
        // theta is estimable here, so the projection adds nothing
        CHECK(report.excess_over_projection <= 1e-13);
        CHECK_THAT(report.projection_risk, WithinAbs(report.direct_risk, 1e-13));
    }
}

TEST_CASE("risk matches a hand-rolled double sum for an arbitrary estimator") {
    const ModelSpace model = testsupport::random_model(42, 9, 4);
    Xoshiro256 rng(17);
    const SampleFunction delta(testsupport::random_vector(rng, 4));
    const ParamFunction gamma(testsupport::random_vector(rng, 9));

    double expected = 0.0;
    for (Index i = 0; i < 9; ++i)
        for (Index j = 0; j < 4; ++j) {
            const double diff = delta[j] - gamma[i];
            expected += model.grid().weights()[i] * model.likelihood()(i, j) * diff * diff;
        }
    CHECK_THAT(bayes_risk(delta, gamma, model), WithinAbs(expected, 1e-14));

    CHECK_THROWS_AS(bayes_risk(SampleFunction(Vector::Ones(3)), gamma, model), LengthMismatch);
    CHECK_THROWS_AS(bayes_risk(delta, ParamFunction(Vector::Ones(2)), model), LengthMismatch);
}

TEST_CASE("bias identity holds across random models") {
    Xoshiro256 rng(1001);
    for (int trial = 0; trial < 30; ++trial) {
        const Index K = 5 + trial;
        const Index N = 2 + trial % 7;
        const ModelSpace model = testsupport::random_model(8100 + trial, K, N);
        const ParamFunction gamma(testsupport::random_vector(rng, K));
        const RiskReport report = risk_via_bias(gamma, model);
        CHECK(std::abs(report.bias_identity_risk - report.direct_risk) <=
              1e-10 * (1.0 + std::abs(report.direct_risk)));
        CHECK(std::abs(report.projection_risk + report.excess_over_projection -
                       report.direct_risk) <= 1e-10 * (1.0 + std::abs(report.direct_risk)));
        CHECK(report.projection_risk <= report.direct_risk + 1e-12);
    }
}

TEST_CASE("an unbiased posterior mean has zero risk") {
    // constants are their own posterior mean and expectation
    const ModelSpace model = testsupport::random_model(7, 8, 3);
    const ParamFunction gamma(Vector::Constant(8, 2.5));
    const RiskReport report = risk_via_bias(gamma, model);
    const ParamFunction expect = apply_U(apply_B(gamma, model), model);
    REQUIRE((expect.values - gamma.values).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(report.direct_risk <= 1e-9);
}
