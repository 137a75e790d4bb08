#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "ubayes/operators.hpp"

namespace ubayes {

/**
 * Polynomials orthonormal with respect to the prior inner product.
 *
 * Row k of `coeff_matrix` holds the monomial coefficients of the k-th basis
 * polynomial (lower triangular; leading coefficient positive).  `node_values`
 * caches the basis evaluated at the grid nodes, column k per polynomial.
 */
struct OrthoBasis {
    int degree_max = 0;
    Matrix coeff_matrix;  // (n+1) x (n+1), row k = coefficients of degree-k polynomial
    Matrix node_values;   // K x (n+1)
    double gram_residual = 0.0;

    double evaluate(int k, double x) const {
        return evaluate_polynomial(coeff_matrix.row(k).transpose(), x);
    }

    ParamFunction function(int k) const { return ParamFunction(node_values.col(k)); }
};

/**
 * Build the prior-orthonormal polynomial basis of degree <= n by modified
 * Gram-Schmidt on the monomials, with one reorthogonalization pass.
 * Deterministic; signs fixed by a positive leading coefficient.
 */
inline OrthoBasis build_ortho_basis(const ModelSpace& model, int n) {
    if (n < 0) throw BadSpec("build_ortho_basis: degree must be nonnegative");
    const Index K = model.param_count();
    if (n + 1 > K)
        throw DegreeTooHigh("build_ortho_basis: degree " + std::to_string(n) +
                            " needs more than " + std::to_string(K) + " grid nodes");

    const Vector& w = model.grid().weights();
    const Vector& nodes = model.grid().nodes();

    OrthoBasis basis;
    basis.degree_max = n;
    basis.coeff_matrix = Matrix::Zero(n + 1, n + 1);
    basis.node_values = Matrix::Zero(K, n + 1);

    auto dot = [&](const Vector& a, const Vector& b) {
        return (a.array() * b.array() * w.array()).sum();
    };

    Vector monomial = Vector::Ones(K);
    for (int k = 0; k <= n; ++k) {
        Vector v = monomial;               // theta^k at the nodes
        Vector c = Vector::Zero(n + 1);    // its monomial coefficients
        c[k] = 1.0;
        const double initial_norm = std::sqrt(dot(v, v));

        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < k; ++j) {
                const double proj = dot(v, basis.node_values.col(j));
                v -= proj * basis.node_values.col(j);
                c -= proj * basis.coeff_matrix.row(j).transpose();
            }
        }

        const double norm = std::sqrt(dot(v, v));
        if (!(norm > 1e-13 * initial_norm))
            throw DegreeTooHigh("build_ortho_basis: moment matrix numerically singular at degree " +
                                std::to_string(k));
        v /= norm;
        c /= norm;
        if (c[k] < 0.0) {  // sign convention
            v = -v;
            c = -c;
        }
        basis.node_values.col(k) = v;
        basis.coeff_matrix.row(k) = c.transpose();

        monomial = monomial.array() * nodes.array();
    }

    const Matrix gram = basis.node_values.transpose() * w.asDiagonal() * basis.node_values;
    basis.gram_residual = (gram - Matrix::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff();
    return basis;
}

/**
 * Monomial coefficients of the degree <= `degree` polynomial closest to `f`
 * in the prior inner product (weighted least squares on the grid).
 */
inline Vector polynomial_fit(const ParamFunction& f, const ModelSpace& model, int degree) {
    if (degree < 0) throw BadSpec("polynomial_fit: degree must be nonnegative");
    if (f.size() != model.param_count())
        throw LengthMismatch("polynomial_fit: expected length " + std::to_string(model.param_count()));
    const Index K = model.param_count();
    const Vector sqrt_w = model.grid().weights().cwiseSqrt();
    Matrix vandermonde(K, degree + 1);
    Vector column = Vector::Ones(K);
    for (int k = 0; k <= degree; ++k) {
        vandermonde.col(k) = column;
        column = column.array() * model.grid().nodes().array();
    }
    const Matrix scaled = sqrt_w.asDiagonal() * vandermonde;
    const Vector rhs = sqrt_w.array() * f.values.array();
    return scaled.colPivHouseholderQr().solve(rhs);
}

/**
 * Posterior mean through the orthonormal-polynomial expansion:
 * sum_k (gamma, p_k)_pi * B(p_k).  On a binomial model of size n with a
 * degree-n basis this reproduces apply_B(gamma) for every gamma, because the
 * basis spans exactly the estimable subspace.
 */
inline SampleFunction bayes_expansion(const ParamFunction& gamma, const ModelSpace& model,
                                      const OrthoBasis& basis) {
    if (gamma.size() != model.param_count())
        throw LengthMismatch("bayes_expansion: expected length " + std::to_string(model.param_count()));
    if (basis.degree_max + 1 != model.sample_count())
        throw DegreeMismatch("bayes_expansion: basis degree " + std::to_string(basis.degree_max) +
                             " does not match a binomial model with " +
                             std::to_string(model.sample_count()) + " outcomes");
    Vector result = Vector::Zero(model.sample_count());
    for (int k = 0; k <= basis.degree_max; ++k) {
        const ParamFunction pk = basis.function(k);
        const double coeff = inner_pi(gamma, pk, model);
        result += coeff * apply_B(pk, model).values;
    }
    return SampleFunction(std::move(result));
}

/**
 * Remainder of the expansion: gamma minus its projection onto the basis
 * span.  The Bayes estimator of the remainder is zero when the basis spans
 * the estimable subspace.
 */
inline ParamFunction expansion_remainder(const ParamFunction& gamma, const OrthoBasis& basis,
                                         const ModelSpace& model) {
    if (gamma.size() != model.param_count())
        throw LengthMismatch("expansion_remainder: expected length " +
                             std::to_string(model.param_count()));
    Vector remainder = gamma.values;
    for (int k = 0; k <= basis.degree_max; ++k) {
        const ParamFunction pk = basis.function(k);
        remainder -= inner_pi(gamma, pk, model) * pk.values;
    }
    return ParamFunction(std::move(remainder));
}

}  // namespace ubayes
