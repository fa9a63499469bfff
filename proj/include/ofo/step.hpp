#pragma once

#include "ofo/types.hpp"

namespace ofo {

/// g(alpha) = a alpha^2 + b alpha + c fitted at alpha = 0 and alpha = alpha_tilde.
struct QuadModel
{
  Scalar a = 0;
  Scalar b = 0;
  Scalar c = 0;
  Scalar alpha_tilde = 0;

  Scalar operator()(Scalar alpha) const { return (a * alpha + b) * alpha + c; }
};

/**
 * @brief Fit from the value and slope at zero and one predicted value.
 *
 * phi_at is the objective at the predicted point
 * (u + alpha_tilde w, y + alpha_tilde grad_h w). Throws DegenerateFitError
 * unless alpha_tilde > 0.
 */
QuadModel fit_quadratic(Scalar phi0, Scalar dphi0, Scalar phi_at, Scalar alpha_tilde);

/// Minimizer of the model over [alpha_min, alpha_max]; endpoint ties go to alpha_min.
Scalar minimize_quadratic(const QuadModel & model, Scalar alpha_min, Scalar alpha_max);

}  // namespace ofo
