#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "ubayes/decompose.hpp"
#include "ubayes/risk.hpp"
#include "ubayes/rng.hpp"

namespace ubayes {

/**
 * One sample size in a consistency study of the averaged unbiased estimator
 * against the Bayes estimator.
 *
 * risk_Un and risk_bayes are the two estimators' Bayes risks for the target;
 * cross_norm is the squared weighted distance between the estimators
 * themselves.  The split risk_Un = risk_bayes + cross_norm holds exactly
 * (the cross term vanishes by conditioning on the data).  tau_over_n is the
 * size-one risk of the unbiased estimator divided by n, which equals risk_Un
 * for i.i.d. sampling.  Standard errors are populated in Monte Carlo mode.
 */
struct ConsistencyRow {
    int n = 0;
    double risk_Un = 0.0;
    double risk_bayes = 0.0;
    double cross_norm = 0.0;
    double tau_over_n = 0.0;
    bool monte_carlo = false;
    double se_risk_Un = 0.0;
    double se_risk_bayes = 0.0;
    double se_cross_norm = 0.0;
};

namespace detail {

/// Per-n data reduced to the sufficient statistic: the count of successes.
/// All quantities in the study depend on the n-fold sample only through it,
/// which collapses the 2^n product outcomes to n+1.
struct CountReduction {
    ModelSpace model;        // binomial(n) on the study grid
    Vector averaged;         // the size-one unbiased estimator averaged over n draws
    Vector bayes;            // posterior mean of the target given the count
};

inline CountReduction reduce_to_count(const ParameterGrid& grid, const ParamFunction& gamma,
                                      const SampleFunction& unbiased_one, int n) {
    CountReduction red{binomial_model(grid, n), Vector(n + 1), Vector()};
    const double at_zero = unbiased_one[0];
    const double at_one = unbiased_one[1];
    for (int s = 0; s <= n; ++s)
        red.averaged[s] = ((n - s) * at_zero + s * at_one) / double(n);
    red.bayes = apply_B(gamma, red.model).values;
    return red;
}

/// The size-one unbiased estimator of the target on a Bernoulli model.
inline SampleFunction size_one_unbiased(const ParameterGrid& grid, const ParamFunction& gamma) {
    const ModelSpace bernoulli = binomial_model(grid, 1);
    return solve_unbiased(gamma, bernoulli, 1e-8);
}

}  // namespace detail

/**
 * Exact consistency table for Bernoulli sampling on the given prior grid.
 *
 * The target must be estimable from a single observation (affine in the
 * parameter); its size-one unbiased estimator is found once, and for each
 * n = 1..n_max all three risks are computed as exact double sums on the
 * binomial count model of size n.
 */
inline std::vector<ConsistencyRow> exact_consistency_table(const ParameterGrid& grid,
                                                           const ParamFunction& gamma,
                                                           int n_max) {
    if (n_max < 1) throw BadSpec("exact_consistency_table: n_max must be at least 1");
    if (n_max > 64)
        throw NMaxTooLarge("exact_consistency_table: n_max " + std::to_string(n_max) +
                           " exceeds the exact-summation cap of 64");

    const SampleFunction unbiased_one = detail::size_one_unbiased(grid, gamma);
    const ModelSpace bernoulli = binomial_model(grid, 1);
    const double tau = bayes_risk(unbiased_one, gamma, bernoulli);

    std::vector<ConsistencyRow> rows;
    rows.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        const auto red = detail::reduce_to_count(grid, gamma, unbiased_one, n);
        ConsistencyRow row;
        row.n = n;
        row.risk_Un = bayes_risk(SampleFunction(red.averaged), gamma, red.model);
        row.risk_bayes = bayes_risk(SampleFunction(red.bayes), gamma, red.model);
        row.cross_norm = inner_m(SampleFunction(Vector(red.averaged - red.bayes)),
                                 SampleFunction(Vector(red.averaged - red.bayes)), red.model);
        row.tau_over_n = tau / double(n);
        rows.push_back(row);
    }
    return rows;
}

/**
 * Monte Carlo estimate of the same three quantities: a parameter node is
 * drawn from the prior, a count from the binomial, and squared discrepancies
 * are averaged over `reps` replications.
 *
 * Each (n, replication) pair owns its own random substream, and per-rep
 * values are reduced in index order, so the result is bit-identical for a
 * given seed regardless of thread count.
 */
inline std::vector<ConsistencyRow> monte_carlo_consistency(const ParameterGrid& grid,
                                                           const ParamFunction& gamma,
                                                           const std::vector<int>& n_list,
                                                           long reps, std::uint64_t seed,
                                                           int threads = 1) {
    if (reps < 1) throw BadSpec("monte_carlo_consistency: reps must be positive");
    if (threads < 1) threads = 1;
    for (int n : n_list)
        if (n < 1 || n > 64)
            throw NMaxTooLarge("monte_carlo_consistency: n must lie in 1..64");
    if (gamma.size() != grid.size())
        throw LengthMismatch("monte_carlo_consistency: target length does not match grid");

    const SampleFunction unbiased_one = detail::size_one_unbiased(grid, gamma);
    const ModelSpace bernoulli = binomial_model(grid, 1);
    const double tau = bayes_risk(unbiased_one, gamma, bernoulli);

    // Prior CDF over the nodes, for inverse-transform sampling.
    const Index K = grid.size();
    std::vector<double> prior_cdf(static_cast<std::size_t>(K));
    double acc = 0.0;
    for (Index i = 0; i < K; ++i) {
        acc += grid.weights()[i];
        prior_cdf[static_cast<std::size_t>(i)] = acc;
    }
    prior_cdf.back() = 1.0;

    std::vector<ConsistencyRow> rows;
    for (int n : n_list) {
        const auto red = detail::reduce_to_count(grid, gamma, unbiased_one, n);

        std::vector<double> sq_un(static_cast<std::size_t>(reps));
        std::vector<double> sq_bayes(static_cast<std::size_t>(reps));
        std::vector<double> sq_cross(static_cast<std::size_t>(reps));

        auto simulate_range = [&](long begin, long end) {
            for (long rep = begin; rep < end; ++rep) {
                Xoshiro256 rng(substream_seed(seed, static_cast<std::uint64_t>(n),
                                              static_cast<std::uint64_t>(rep)));
                const double u = rng.uniform();
                const auto it = std::lower_bound(prior_cdf.begin(), prior_cdf.end(), u);
                const Index node = static_cast<Index>(it - prior_cdf.begin());
                const double theta = grid.nodes()[node];
                int count = 0;
                for (int t = 0; t < n; ++t)
                    if (rng.uniform() < theta) ++count;
                const double target = gamma[node];
                const double mean_est = red.averaged[count];
                const double bayes_est = red.bayes[count];
                const std::size_t slot = static_cast<std::size_t>(rep);
                sq_un[slot] = (mean_est - target) * (mean_est - target);
                sq_bayes[slot] = (bayes_est - target) * (bayes_est - target);
                sq_cross[slot] = (mean_est - bayes_est) * (mean_est - bayes_est);
            }
        };

        if (threads == 1) {
            simulate_range(0, reps);
        } else {
            std::vector<std::thread> pool;
            const long chunk = (reps + threads - 1) / threads;
            for (int t = 0; t < threads; ++t) {
                const long begin = t * chunk;
                const long end = std::min(reps, begin + chunk);
                if (begin >= end) break;
                pool.emplace_back(simulate_range, begin, end);
            }
            for (auto& th : pool) th.join();
        }

        // Fixed-order reduction keeps the aggregate independent of scheduling.
        auto reduce = [&](const std::vector<double>& values, double& mean_out, double& se_out) {
            double sum = 0.0;
            for (double v : values) sum += v;
            const double mean = sum / double(reps);
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            const double variance = reps > 1 ? ss / double(reps - 1) : 0.0;
            mean_out = mean;
            se_out = std::sqrt(variance / double(reps));
        };

        ConsistencyRow row;
        row.n = n;
        row.monte_carlo = true;
        row.tau_over_n = tau / double(n);
        reduce(sq_un, row.risk_Un, row.se_risk_Un);
        reduce(sq_bayes, row.risk_bayes, row.se_risk_bayes);
        reduce(sq_cross, row.cross_norm, row.se_cross_norm);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ubayes
