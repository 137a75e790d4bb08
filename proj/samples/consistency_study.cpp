// Exact and Monte Carlo comparison of the averaged unbiased estimator
// against the Bayes estimator as the sample size grows.

#include <cstdio>
#include <vector>

#include "ubayes/ubayes.hpp"

using namespace ubayes;

int main() {
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(64);
    const ParamFunction gamma(grid.nodes());  // estimate theta itself

    std::printf("exact (n, risk_Un, risk_bayes, cross_norm):\n");
    for (const auto& row : exact_consistency_table(grid, gamma, 16))
        std::printf("  %2d  %.10f  %.10f  %.10f\n", row.n, row.risk_Un, row.risk_bayes,
                    row.cross_norm);

    std::printf("\nMonte Carlo, 100000 replications, seed 42:\n");
    for (const auto& row : monte_carlo_consistency(grid, gamma, {4, 16, 64}, 100000, 42, 4))
        std::printf("  %2d  cross_norm %.6g +/- %.2g\n", row.n, row.cross_norm,
                    row.se_cross_norm);
    return 0;
}
