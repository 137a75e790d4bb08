// Walkthrough on a single Bernoulli draw with a uniform prior: build the
// model, apply both transforms, split a target into estimable and
// non-estimable parts, and compare the risks the two routes give.

#include <cmath>
#include <iostream>

#include "ubayes/ubayes.hpp"

using namespace ubayes;

int main() {
    const ModelSpace model = builtin_model("bernoulli", 64);

    std::cout << "marginal of X: " << model.marginal().transpose() << "\n\n";

    // the posterior mean of exp(theta) given X = 0 and X = 1
    Vector g(model.param_count());
    for (Index i = 0; i < g.size(); ++i) g[i] = std::exp(model.grid().nodes()[i]);
    const ParamFunction gamma(std::move(g));
    const SampleFunction bayes = apply_B(gamma, model);
    std::cout << "posterior means of exp(theta): " << bayes.values.transpose() << '\n';
    std::cout << "closed forms:                  " << 2.0 * (std::exp(1.0) - 2.0) << ' ' << 2.0
              << "\n\n";

    // exp(theta) has no unbiased estimator here; its estimable part is affine
    const ParamDecomp split = decompose_param(gamma, model);
    const Vector affine = polynomial_fit(split.part_in_range, model, 1);
    std::cout << "estimable part: " << affine[0] << " + " << affine[1] << " * theta\n";

    const RiskReport report = projection_risk_split(gamma, model);
    std::cout << "risk against exp(theta):      " << report.direct_risk << '\n';
    std::cout << "risk against estimable part:  " << report.projection_risk << '\n';
    std::cout << "excess (squared null norm):   " << report.excess_over_projection << '\n';
    return 0;
}
