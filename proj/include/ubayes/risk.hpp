#pragma once

#include <cmath>
#include <string>

#include "ubayes/decompose.hpp"

namespace ubayes {

/**
 * Risk figures for a parameter function and its Bayes estimator.
 *
 *  - direct_risk: prior-averaged mean squared error of the Bayes estimator
 *    against the target, computed as an exact double sum.
 *  - bias_fn: target minus the expectation function of the Bayes estimator.
 *  - bias_identity_risk: (bias_fn, target) in the prior inner product; for a
 *    Bayes estimator this equals direct_risk.
 *  - projection_risk: risk of the same estimator against the estimable
 *    projection of the target (it is the Bayes estimator of both).
 *  - excess_over_projection: squared weighted norm of the non-estimable
 *    remainder; direct_risk = projection_risk + excess_over_projection.
 */
struct RiskReport {
    double direct_risk = 0.0;
    ParamFunction bias_fn;
    double bias_identity_risk = 0.0;
    double projection_risk = 0.0;
    double excess_over_projection = 0.0;
};

/**
 * Prior-averaged mean squared error of estimator `delta` for target `gamma`:
 * sum_i w_i sum_j P(i,j) (delta_j - gamma_i)^2.
 */
inline double bayes_risk(const SampleFunction& delta, const ParamFunction& gamma,
                         const ModelSpace& model) {
    const Index K = model.param_count();
    const Index N = model.sample_count();
    if (delta.size() != N)
        throw LengthMismatch("bayes_risk: expected estimator of length " + std::to_string(N));
    if (gamma.size() != K)
        throw LengthMismatch("bayes_risk: expected parameter function of length " + std::to_string(K));
    double total = 0.0;
    for (Index i = 0; i < K; ++i) {
        double row = 0.0;
        for (Index j = 0; j < N; ++j) {
            const double diff = delta[j] - gamma[i];
            row += model.likelihood()(i, j) * diff * diff;
        }
        total += model.grid().weights()[i] * row;
    }
    return total;
}

namespace detail {

inline void check_identity(double lhs, double rhs, double rel_tol, const char* what) {
    if (std::abs(lhs - rhs) > rel_tol * (1.0 + std::abs(rhs)))
        throw Error("IdentityViolation", std::string(what) + ": " + std::to_string(lhs) +
                                             " vs " + std::to_string(rhs));
}

}  // namespace detail

/**
 * Risk of the Bayes estimator of `gamma` through the bias identity: with
 * b = gamma - U(B(gamma)), the risk equals (b, gamma)_pi.  Both routes are
 * computed and cross-checked to 1e-10 relative.
 */
inline RiskReport risk_via_bias(const ParamFunction& gamma, const ModelSpace& model) {
    RiskReport report;
    const SampleFunction bayes_rule = apply_B(gamma, model);
    const ParamFunction expectation = apply_U(bayes_rule, model);
    report.bias_fn = ParamFunction(gamma.values - expectation.values);
    report.direct_risk = bayes_risk(bayes_rule, gamma, model);
    report.bias_identity_risk = inner_pi(report.bias_fn, gamma, model);
    detail::check_identity(report.bias_identity_risk, report.direct_risk, 1e-10,
                           "risk_via_bias: bias identity");

    const ParamDecomp decomp = decompose_param(gamma, model);
    report.projection_risk = bayes_risk(bayes_rule, decomp.part_in_range, model);
    report.excess_over_projection = inner_pi(decomp.part_in_null, decomp.part_in_null, model);
    return report;
}

/**
 * Additive split of the Bayes-estimator risk: risk against the target equals
 * risk against its estimable projection plus the squared norm of the
 * remainder.  The additivity is verified to 1e-10 relative; whenever the
 * remainder is nonzero the projection risk is strictly smaller.
 */
inline RiskReport projection_risk_split(const ParamFunction& gamma, const ModelSpace& model) {
    RiskReport report = risk_via_bias(gamma, model);
    detail::check_identity(report.projection_risk + report.excess_over_projection,
                           report.direct_risk, 1e-10, "projection_risk_split: additivity");
    return report;
}

}  // namespace ubayes
