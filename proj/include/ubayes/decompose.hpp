#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>

#include "ubayes/operators.hpp"

namespace ubayes {

/**
 * An orthogonal split of a function into its component inside an operator
 * range and the complementary component inside the dual null space.
 *
 * For a parameter function the parts are the estimable projection and the
 * piece whose Bayes estimator is zero; for an estimator they are the Bayes
 * part and the unbiased estimator of zero.  `pythagoras_residual` is
 * | ||whole||^2 - ||part_in_range||^2 - ||part_in_null||^2 | in the side's
 * weighted norm.
 */
template <typename Fn>
struct DecompResult {
    Fn part_in_range;
    Fn part_in_null;
    double pythagoras_residual = 0.0;
};

using ParamDecomp = DecompResult<ParamFunction>;
using SampleDecomp = DecompResult<SampleFunction>;

namespace detail {

struct SplitParts {
    Vector in_range, in_null;
    double pythagoras = 0.0;
    double null_norm = 0.0;  // whitened 2-norm == weighted norm of the null part
};

// Orthogonal projection in whitened coordinates. `whitened` is the vector
// pre-multiplied by sqrt(weights); `basis` holds orthonormal columns
// spanning the whitened range.
inline SplitParts split_against(const Eigen::Ref<const Matrix>& basis, const Vector& whitened,
                                const Vector& sqrt_weights) {
    SplitParts out;
    const Vector coeffs = basis.transpose() * whitened;
    const Vector range_w = basis * coeffs;
    const Vector null_w = whitened - range_w;
    out.in_range = range_w.array() / sqrt_weights.array();
    out.in_null = null_w.array() / sqrt_weights.array();
    const double whole2 = whitened.squaredNorm();
    out.null_norm = null_w.norm();
    out.pythagoras = std::abs(whole2 - range_w.squaredNorm() - null_w.squaredNorm());
    return out;
}

}  // namespace detail

/**
 * Split a parameter function into its weighted least-squares projection onto
 * the estimable subspace plus a remainder whose Bayes estimator is zero.
 */
inline ParamDecomp decompose_param(const ParamFunction& gamma, const ModelSpace& model,
                                   double tol = detail::kDefaultRankTol) {
    detail::check_rank_tol(tol);
    if (gamma.size() != model.param_count())
        throw LengthMismatch("decompose_param: expected length " + std::to_string(model.param_count()));
    const detail::WhitenedSvd w(model);
    const int r = w.rank(tol);
    const Vector whitened = gamma.values.array() * w.sqrt_w.array();
    auto parts = detail::split_against(w.svd.matrixU().leftCols(r), whitened, w.sqrt_w);
    return ParamDecomp{ParamFunction(std::move(parts.in_range)),
                       ParamFunction(std::move(parts.in_null)), parts.pythagoras};
}

/**
 * Split an estimator into a Bayes estimator (of some parameter function)
 * plus an unbiased estimator of zero.
 */
inline SampleDecomp decompose_sample(const SampleFunction& delta, const ModelSpace& model,
                                     double tol = detail::kDefaultRankTol) {
    detail::check_rank_tol(tol);
    if (delta.size() != model.sample_count())
        throw LengthMismatch("decompose_sample: expected length " + std::to_string(model.sample_count()));
    const detail::WhitenedSvd w(model);
    const int r = w.rank(tol);
    const Vector whitened = delta.values.array() * w.sqrt_m.array();
    auto parts = detail::split_against(w.svd.matrixV().leftCols(r), whitened, w.sqrt_m);
    return SampleDecomp{SampleFunction(std::move(parts.in_range)),
                        SampleFunction(std::move(parts.in_null)), parts.pythagoras};
}

/**
 * Raised when a target function has no unbiased estimator.  Carries the
 * projection onto the estimable subspace and the weighted norm of the
 * unreachable remainder, so callers can see the nearest attainable target.
 */
class NotEstimable : public Error {
public:
    NotEstimable(ParamFunction nearest, double residual, const std::string& message)
        : Error("NotEstimable", message),
          nearest_estimable(std::move(nearest)),
          residual_norm(residual) {}

    ParamFunction nearest_estimable;
    double residual_norm;
};

/**
 * Minimum-weighted-norm estimator with expectation function `gamma`.
 *
 * `gamma` counts as estimable when the relative projection residual onto the
 * estimable subspace is at most `tol`; otherwise NotEstimable is thrown.
 * Among the solutions (which differ by unbiased estimators of zero) the one
 * orthogonal to the null space is returned, making the result deterministic.
 */
inline SampleFunction solve_unbiased(const ParamFunction& gamma, const ModelSpace& model,
                                     double tol = 1e-8,
                                     double rank_tol = detail::kDefaultRankTol) {
    detail::check_rank_tol(rank_tol);
    if (!(tol > 0.0)) throw BadTolerance("solve_unbiased: tolerance must be positive");
    if (gamma.size() != model.param_count())
        throw LengthMismatch("solve_unbiased: expected length " + std::to_string(model.param_count()));

    const detail::WhitenedSvd w(model);
    const int r = w.rank(rank_tol);
    const Vector whitened = gamma.values.array() * w.sqrt_w.array();
    const Vector coeffs = w.svd.matrixU().leftCols(r).transpose() * whitened;
    const Vector range_w = w.svd.matrixU().leftCols(r) * coeffs;
    const double gamma_norm = whitened.norm();
    const double residual = (whitened - range_w).norm();
    if (residual > tol * (gamma_norm > 0.0 ? gamma_norm : 1.0)) {
        ParamFunction nearest(Vector(range_w.array() / w.sqrt_w.array()));
        throw NotEstimable(std::move(nearest), residual,
                           "solve_unbiased: no unbiased estimator exists (relative residual " +
                               std::to_string(residual / (gamma_norm > 0.0 ? gamma_norm : 1.0)) + ")");
    }
    const Vector scaled = coeffs.array() / w.svd.singularValues().head(r).array();
    const Vector solution_w = w.svd.matrixV().leftCols(r) * scaled;
    return SampleFunction(Vector(solution_w.array() / w.sqrt_m.array()));
}

}  // namespace ubayes
