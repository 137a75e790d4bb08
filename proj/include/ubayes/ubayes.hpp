#pragma once

// Umbrella header: the full library.
//
// A statistical model with a finite (or discretized) parameter set and a
// finite sample space is stored as a pair of weighted inner-product spaces:
// functions of the parameter weighted by the prior, and estimators weighted
// by the prior-mixed marginal.  The expectation transform (likelihood
// matrix) and the posterior-mean transform (posterior matrix) are adjoint
// between the two.  Everything else here (orthogonal decompositions,
// unbiased-estimator solving, Bayes-risk identities, orthonormal polynomial
// expansions, consistency tables) falls out of that one fact.

#include "ubayes/consistency.hpp"
#include "ubayes/decompose.hpp"
#include "ubayes/errors.hpp"
#include "ubayes/io.hpp"
#include "ubayes/model.hpp"
#include "ubayes/operators.hpp"
#include "ubayes/ortho_poly.hpp"
#include "ubayes/quadrature.hpp"
#include "ubayes/risk.hpp"
#include "ubayes/rng.hpp"
