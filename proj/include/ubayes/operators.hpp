#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "ubayes/model.hpp"

namespace ubayes {

/**
 * Expectation transform U: maps an estimator to the function of the
 * parameter giving its expected value at each node.  This is the likelihood
 * matrix acting on the estimator and does not involve the prior.
 */
inline ParamFunction apply_U(const SampleFunction& delta, const ModelSpace& model) {
    if (delta.size() != model.sample_count())
        throw LengthMismatch("apply_U: expected estimator of length " +
                             std::to_string(model.sample_count()));
    return ParamFunction(model.likelihood() * delta.values);
}

/**
 * Bayes transform B: maps a parameter function to its posterior mean at each
 * outcome.  This is the posterior matrix acting on the function.
 */
inline SampleFunction apply_B(const ParamFunction& gamma, const ModelSpace& model) {
    if (gamma.size() != model.param_count())
        throw LengthMismatch("apply_B: expected parameter function of length " +
                             std::to_string(model.param_count()));
    return SampleFunction(model.posterior() * gamma.values);
}

/**
 * |(gamma, U delta)_pi - (B gamma, delta)_m|.
 *
 * The two transforms are adjoint between the weighted spaces, so this
 * vanishes up to rounding for every pair.
 */
inline double adjointness_residual(const ParamFunction& gamma, const SampleFunction& delta,
                                   const ModelSpace& model) {
    const double lhs = inner_pi(gamma, apply_U(delta, model), model);
    const double rhs = inner_m(apply_B(gamma, model), delta, model);
    return std::abs(lhs - rhs);
}

/// Which weighted space a set of basis vectors lives in.
enum class Side { param_space, sample_space };

/**
 * Orthonormal basis of a range or null space of one of the two operators,
 * orthonormal under the owning side's weighted inner product.  Columns of
 * `vectors` are the basis elements; only the spanned subspace is meaningful,
 * individual vectors are unique only up to rotation.
 */
struct SubspaceBasis {
    Side side;
    Matrix vectors;   // K x rank (param side) or N x rank (sample side)
    int rank = 0;
    double tol_used = 0.0;

    Index dimension() const { return vectors.rows(); }
};

namespace detail {

constexpr double kDefaultRankTol = 1e-10;

inline void check_rank_tol(double tol) {
    if (!(tol > 0.0) || tol > 1e-4)
        throw BadTolerance("rank tolerance must lie in (0, 1e-4]");
}

/**
 * SVD of the whitened operator A = diag(sqrt(w)) * likelihood * diag(1/sqrt(m)).
 *
 * Rescaling by the square roots of the weights turns weighted orthonormality
 * into standard orthonormality, so ranges and null spaces of both operators
 * fall out of one factorization:
 *
 *   range of U  = diag(1/sqrt(w)) * span of the leading left vectors
 *   null of B   = diag(1/sqrt(w)) * span of the trailing left vectors
 *   range of B  = diag(1/sqrt(m)) * span of the leading right vectors
 *   null of U   = diag(1/sqrt(m)) * span of the trailing right vectors
 *
 * (the whitened adjoint of A is exactly A^T, by the defining identity of
 * ModelSpace).
 */
struct WhitenedSvd {
    Vector sqrt_w, sqrt_m;
    Eigen::JacobiSVD<Matrix> svd;

    explicit WhitenedSvd(const ModelSpace& model)
        : sqrt_w(model.grid().weights().cwiseSqrt()),
          sqrt_m(model.marginal().cwiseSqrt()) {
        Matrix a = sqrt_w.asDiagonal() * model.likelihood();
        a = a * sqrt_m.cwiseInverse().asDiagonal();
        svd.compute(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    }

    int rank(double tol) const {
        const auto& sigma = svd.singularValues();
        if (sigma.size() == 0 || sigma[0] <= 0.0) return 0;
        int r = 0;
        while (r < sigma.size() && sigma[r] > tol * sigma[0]) ++r;
        return r;
    }
};

inline SubspaceBasis unwhiten(const Matrix& columns, const Vector& sqrt_weights, Side side,
                              double tol) {
    SubspaceBasis basis;
    basis.side = side;
    basis.vectors = sqrt_weights.cwiseInverse().asDiagonal() * columns;
    basis.rank = static_cast<int>(columns.cols());
    basis.tol_used = tol;
    return basis;
}

}  // namespace detail

/// Basis of the functions possessing an unbiased estimator (range of U).
inline SubspaceBasis range_basis_U(const ModelSpace& model, double tol = detail::kDefaultRankTol) {
    detail::check_rank_tol(tol);
    const detail::WhitenedSvd w(model);
    const int r = w.rank(tol);
    return detail::unwhiten(w.svd.matrixU().leftCols(r), w.sqrt_w, Side::param_space, tol);
}

/// Basis of the unbiased estimators of zero (null space of U).
inline SubspaceBasis null_basis_U(const ModelSpace& model, double tol = detail::kDefaultRankTol) {
    detail::check_rank_tol(tol);
    const detail::WhitenedSvd w(model);
    const int r = w.rank(tol);
    const Index n = model.sample_count();
    return detail::unwhiten(w.svd.matrixV().rightCols(n - r), w.sqrt_m, Side::sample_space, tol);
}

/// Basis of the Bayes estimators (range of B).
inline SubspaceBasis range_basis_B(const ModelSpace& model, double tol = detail::kDefaultRankTol) {
    detail::check_rank_tol(tol);
    const detail::WhitenedSvd w(model);
    const int r = w.rank(tol);
    return detail::unwhiten(w.svd.matrixV().leftCols(r), w.sqrt_m, Side::sample_space, tol);
}

/// Basis of the functions whose Bayes estimator is zero (null space of B).
inline SubspaceBasis null_basis_B(const ModelSpace& model, double tol = detail::kDefaultRankTol) {
    detail::check_rank_tol(tol);
    const detail::WhitenedSvd w(model);
    const int r = w.rank(tol);
    const Index k = model.param_count();
    return detail::unwhiten(w.svd.matrixU().rightCols(k - r), w.sqrt_w, Side::param_space, tol);
}

namespace detail {

inline const Vector& side_weights(const SubspaceBasis& basis, const ModelSpace& model) {
    return basis.side == Side::param_space ? model.grid().weights() : model.marginal();
}

}  // namespace detail

/**
 * Relative residual of projecting `v` onto the span of `basis` under the
 * side's weighted inner product; zero means membership.  Returns 0 for the
 * zero vector.
 */
inline double projection_residual(const SubspaceBasis& basis, const Vector& v,
                                  const ModelSpace& model) {
    if (v.size() != basis.dimension())
        throw LengthMismatch("projection_residual: vector length does not match basis side");
    const Vector& w = detail::side_weights(basis, model);
    const Vector weighted = v.array() * w.array();
    const Vector coeffs = basis.vectors.transpose() * weighted;  // (q_k, v)_w
    const Vector residual = v - basis.vectors * coeffs;
    const double v_norm = std::sqrt((v.array().square() * w.array()).sum());
    if (v_norm == 0.0) return 0.0;
    const double r_norm = std::sqrt((residual.array().square() * w.array()).sum());
    return r_norm / v_norm;
}

/// Max absolute deviation of the basis Gram matrix from the identity.
inline double gram_residual(const SubspaceBasis& basis, const ModelSpace& model) {
    if (basis.rank == 0) return 0.0;
    const Vector& w = detail::side_weights(basis, model);
    const Matrix gram = basis.vectors.transpose() * w.asDiagonal() * basis.vectors;
    return (gram - Matrix::Identity(basis.rank, basis.rank)).cwiseAbs().maxCoeff();
}

}  // namespace ubayes
