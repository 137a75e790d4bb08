#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ubayes/errors.hpp"
#include "ubayes/quadrature.hpp"

namespace ubayes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

namespace detail {

inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw NonFiniteValue(std::string(what) + ": non-finite entry");
}

}  // namespace detail

/**
 * A real-valued function of the parameter, stored as its values at the grid
 * nodes.  Square-integrability against the prior is automatic on a finite
 * grid.
 */
struct ParamFunction {
    Vector values;

    ParamFunction() = default;
    explicit ParamFunction(Vector v) : values(std::move(v)) {
        detail::require_finite(values, "ParamFunction");
    }

    Index size() const { return values.size(); }
    double operator[](Index i) const { return values[i]; }
};

/**
 * A real-valued function of the data (an estimator), stored as its values at
 * the sample outcomes.
 */
struct SampleFunction {
    Vector values;

    SampleFunction() = default;
    explicit SampleFunction(Vector v) : values(std::move(v)) {
        detail::require_finite(values, "SampleFunction");
    }

    Index size() const { return values.size(); }
    double operator[](Index i) const { return values[i]; }
};

/**
 * Discretized parameter space: strictly increasing nodes with strictly
 * positive probability masses summing to one.
 *
 * A node weight is the prior density times the quadrature weight of the
 * node, so sums against the weights realize prior integrals.
 */
class ParameterGrid {
public:
    ParameterGrid(Vector nodes, Vector weights)
        : nodes_(std::move(nodes)), weights_(std::move(weights)) {
        if (nodes_.size() != weights_.size())
            throw LengthMismatch("ParameterGrid: nodes and weights differ in length");
        if (nodes_.size() == 0) throw BadSpec("ParameterGrid: empty grid");
        detail::require_finite(nodes_, "ParameterGrid nodes");
        detail::require_finite(weights_, "ParameterGrid weights");
        for (Index i = 0; i + 1 < nodes_.size(); ++i)
            if (!(nodes_[i] < nodes_[i + 1]))
                throw NonIncreasingNodes("ParameterGrid: nodes must be strictly increasing");
        for (Index i = 0; i < weights_.size(); ++i)
            if (!(weights_[i] > 0.0))
                throw ZeroPriorWeight("ParameterGrid: prior weight must be strictly positive at every node");
        const double total = weights_.sum();
        if (std::abs(total - 1.0) > 1e-12)
            throw PriorNotNormalized("ParameterGrid: weights sum to " + std::to_string(total) +
                                     ", expected 1 within 1e-12");
    }

    /// Gauss-Legendre discretization of the uniform prior on (0, 1).
    static ParameterGrid uniform_gauss_legendre(int size) {
        const QuadratureRule rule = gauss_legendre_01(size);
        Vector nodes = Eigen::Map<const Vector>(rule.nodes.data(), static_cast<Index>(rule.nodes.size()));
        Vector weights = Eigen::Map<const Vector>(rule.weights.data(), static_cast<Index>(rule.weights.size()));
        return ParameterGrid(std::move(nodes), std::move(weights));
    }

    /// Rescale raw weights to unit mass, then validate.  Explicit opt-in;
    /// the main constructor never renormalizes.
    static ParameterGrid normalized(Vector nodes, Vector raw_weights) {
        const double total = raw_weights.sum();
        if (!(total > 0.0) || !std::isfinite(total))
            throw ZeroPriorWeight("ParameterGrid::normalized: weights must have positive finite sum");
        return ParameterGrid(std::move(nodes), raw_weights / total);
    }

    const Vector& nodes() const { return nodes_; }
    const Vector& weights() const { return weights_; }
    Index size() const { return nodes_.size(); }

private:
    Vector nodes_;
    Vector weights_;
};

/// Finite sample space: distinct outcome labels.
class SampleSpace {
public:
    explicit SampleSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) throw BadSpec("SampleSpace: need at least one outcome");
        std::unordered_set<std::string> seen;
        for (const auto& l : labels_)
            if (!seen.insert(l).second)
                throw DuplicateLabel("SampleSpace: duplicate outcome label '" + l + "'");
    }

    /// Outcomes labeled "0", "1", ..., "n-1".
    static SampleSpace indexed(Index n, Index first = 0) {
        std::vector<std::string> labels;
        labels.reserve(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) labels.push_back(std::to_string(first + i));
        return SampleSpace(std::move(labels));
    }

    const std::vector<std::string>& labels() const { return labels_; }
    Index size() const { return static_cast<Index>(labels_.size()); }

private:
    std::vector<std::string> labels_;
};

/**
 * A discretized statistical model together with a prior.
 *
 * Holds the K x N likelihood matrix (row i is the pmf of the data under the
 * i-th parameter node), the length-N marginal obtained by mixing the rows
 * with the prior weights, and the N x K posterior matrix (row j is the
 * posterior mass function of the parameter given outcome j).  The two
 * weighted inner products of the library live on this object:
 *
 *   parameter side: (f, g)   = sum_i f_i g_i w_i      (prior weights)
 *   sample side:    (d1, d2) = sum_j d1_j d2_j m_j    (marginal weights)
 *
 * The defining algebraic identity, verified at construction, is
 *
 *   posterior(j, i) * marginal(j) = likelihood(i, j) * weight(i)
 *
 * which is what makes the two operators of operators.hpp adjoint.
 * Instances are immutable after construction and safe to share across
 * threads.
 */
class ModelSpace {
public:
    static ModelSpace build(ParameterGrid grid, SampleSpace samples, Matrix likelihood,
                            double row_sum_tol = 1e-9) {
        const Index K = grid.size();
        const Index N = samples.size();
        if (likelihood.rows() != K || likelihood.cols() != N)
            throw LengthMismatch("build_model: likelihood must be K x N (" + std::to_string(K) +
                                 " x " + std::to_string(N) + ")");
        if (!likelihood.allFinite())
            throw NonFiniteValue("build_model: likelihood has non-finite entries");
        for (Index i = 0; i < K; ++i) {
            if ((likelihood.row(i).array() < 0.0).any())
                throw NonStochasticRow("build_model: negative entry in likelihood row " + std::to_string(i));
            const double s = likelihood.row(i).sum();
            if (std::abs(s - 1.0) > row_sum_tol)
                throw NonStochasticRow("build_model: likelihood row " + std::to_string(i) +
                                       " sums to " + std::to_string(s));
        }

        Vector marginal = likelihood.transpose() * grid.weights();
        for (Index j = 0; j < N; ++j)
            if (!(marginal[j] > 0.0))
                throw ZeroMarginal("build_model: outcome '" + samples.labels()[static_cast<std::size_t>(j)] +
                                   "' has zero marginal probability");

        // posterior(j, i) = likelihood(i, j) * weight(i) / marginal(j)
        Matrix posterior = (likelihood.transpose() * grid.weights().asDiagonal());
        posterior.array().colwise() /= marginal.array();

        return ModelSpace(std::move(grid), std::move(samples), std::move(likelihood),
                          std::move(marginal), std::move(posterior));
    }

    const ParameterGrid& grid() const { return grid_; }
    const SampleSpace& samples() const { return samples_; }
    const Matrix& likelihood() const { return likelihood_; }  // K x N
    const Vector& marginal() const { return marginal_; }      // N
    const Matrix& posterior() const { return posterior_; }    // N x K

    Index param_count() const { return grid_.size(); }
    Index sample_count() const { return samples_.size(); }

private:
    ModelSpace(ParameterGrid grid, SampleSpace samples, Matrix likelihood, Vector marginal,
               Matrix posterior)
        : grid_(std::move(grid)),
          samples_(std::move(samples)),
          likelihood_(std::move(likelihood)),
          marginal_(std::move(marginal)),
          posterior_(std::move(posterior)) {}

    ParameterGrid grid_;
    SampleSpace samples_;
    Matrix likelihood_;
    Vector marginal_;
    Matrix posterior_;
};

inline ModelSpace build_model(ParameterGrid grid, SampleSpace samples, Matrix likelihood) {
    return ModelSpace::build(std::move(grid), std::move(samples), std::move(likelihood));
}

/// Prior-weighted inner product on parameter functions.
inline double inner_pi(const ParamFunction& f, const ParamFunction& g, const ModelSpace& model) {
    const Index K = model.param_count();
    if (f.size() != K || g.size() != K)
        throw LengthMismatch("inner_pi: expected vectors of length " + std::to_string(K));
    return (f.values.array() * g.values.array() * model.grid().weights().array()).sum();
}

/// Marginal-weighted inner product on estimators.
inline double inner_m(const SampleFunction& d1, const SampleFunction& d2, const ModelSpace& model) {
    const Index N = model.sample_count();
    if (d1.size() != N || d2.size() != N)
        throw LengthMismatch("inner_m: expected vectors of length " + std::to_string(N));
    return (d1.values.array() * d2.values.array() * model.marginal().array()).sum();
}

inline double norm_pi(const ParamFunction& f, const ModelSpace& model) {
    return std::sqrt(inner_pi(f, f, model));
}

inline double norm_m(const SampleFunction& d, const ModelSpace& model) {
    return std::sqrt(inner_m(d, d, model));
}

/// Binomial-count likelihood of size n on an arbitrary prior grid: outcome s
/// in {0..n} has probability C(n,s) theta^s (1-theta)^(n-s).
inline ModelSpace binomial_model(const ParameterGrid& grid, int n) {
    if (n < 1) throw BadSpec("binomial_model: size must be at least 1");
    const Index K = grid.size();
    const Index N = n + 1;
    Matrix likelihood(K, N);
    for (Index i = 0; i < K; ++i) {
        const double theta = grid.nodes()[i];
        double binom = 1.0;  // C(n, s), updated multiplicatively
        for (Index s = 0; s < N; ++s) {
            likelihood(i, s) = binom * std::pow(theta, double(s)) * std::pow(1.0 - theta, double(n - s));
            binom *= double(n - s) / double(s + 1);
        }
    }
    return ModelSpace::build(grid, SampleSpace::indexed(N), std::move(likelihood));
}

/// Selector for the models shipped with the library.
struct BuiltinSpec {
    std::string name;  // "example1" | "bernoulli" | "binomial"
    int n = 1;         // binomial size, ignored otherwise
};

/**
 * Named built-in models on a Gauss-Legendre grid over (0,1) with uniform
 * prior.
 *
 *  - "example1":  three outcomes with pmf (1/2, (1-theta)/4, (1+theta)/4)
 *  - "bernoulli": binomial of size 1
 *  - "binomial":  binomial of size spec.n
 */
inline ModelSpace builtin_model(const BuiltinSpec& spec, int grid_size) {
    if (grid_size < 2) throw BadSpec("builtin_model: grid_size must be at least 2");
    const ParameterGrid grid = ParameterGrid::uniform_gauss_legendre(grid_size);
    if (spec.name == "example1") {
        const Index K = grid.size();
        Matrix likelihood(K, 3);
        for (Index i = 0; i < K; ++i) {
            const double theta = grid.nodes()[i];
            likelihood(i, 0) = 0.5;
            likelihood(i, 1) = 0.25 * (1.0 - theta);
            likelihood(i, 2) = 0.25 * (1.0 + theta);
        }
        return ModelSpace::build(grid, SampleSpace::indexed(3, 1), std::move(likelihood));
    }
    if (spec.name == "bernoulli") return binomial_model(grid, 1);
    if (spec.name == "binomial") {
        if (spec.n < 1) throw BadSpec("builtin_model: binomial size must be at least 1");
        return binomial_model(grid, spec.n);
    }
    throw UnknownName("builtin_model: unknown model '" + spec.name + "'");
}

inline ModelSpace builtin_model(const std::string& name, int grid_size) {
    return builtin_model(BuiltinSpec{name, 1}, grid_size);
}

/// Evaluate a polynomial sum_k coeffs[k] x^k by Horner's rule.
inline double evaluate_polynomial(const Vector& coeffs, double x) {
    double acc = 0.0;
    for (Index k = coeffs.size() - 1; k >= 0; --k) acc = acc * x + coeffs[k];
    return acc;
}

/// Grid values of a polynomial in the parameter.
inline ParamFunction polynomial_on_grid(const Vector& coeffs, const ParameterGrid& grid) {
    Vector v(grid.size());
    for (Index i = 0; i < grid.size(); ++i) v[i] = evaluate_polynomial(coeffs, grid.nodes()[i]);
    return ParamFunction(std::move(v));
}

}  // namespace ubayes
