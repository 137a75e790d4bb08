#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "ubayes/errors.hpp"

namespace ubayes {

/// Nodes and weights of a quadrature rule on some interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/**
 * Gauss-Legendre rule with `n` points on [-1, 1].
 *
 * Roots of the degree-n Legendre polynomial are found by Newton iteration on
 * the three-term recurrence, starting from the Tricomi cosine approximation.
 * Exact (to rounding) for polynomials of degree <= 2n-1.
 */
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw BadSpec("gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);

    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Root closest to +1 comes first.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double deriv = 0.0;
        for (int iter = 0; iter < 64; ++iter) {
            double p_curr = 1.0;  // P_0
            double p_prev = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p_old = p_prev;
                p_prev = p_curr;
                p_curr = ((2 * k + 1) * x * p_prev - k * p_old) / (k + 1);
            }
            // p_curr = P_n(x), p_prev = P_{n-1}(x)
            deriv = n * (x * p_curr - p_prev) / (x * x - 1.0);
            const double dx = p_curr / deriv;
            x -= dx;
            if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x)) && iter > 1) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

/// Gauss-Legendre rule mapped to (0, 1); weights sum to one.
inline QuadratureRule gauss_legendre_01(int n) {
    QuadratureRule rule = gauss_legendre(n);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        rule.nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
        rule.weights[i] *= 0.5;
    }
    return rule;
}

}  // namespace ubayes
