#include "ofo/step.hpp"

#include <algorithm>
#include <cmath>

namespace ofo {

QuadModel fit_quadratic(Scalar phi0, Scalar dphi0, Scalar phi_at, Scalar alpha_tilde)
{
  if (!(alpha_tilde > 0) || !std::isfinite(alpha_tilde)) {
    throw DegenerateFitError("fit_quadratic: alpha_tilde must be positive");
  }
  QuadModel m;
  m.c           = phi0;
  m.b           = dphi0;
  m.a           = (phi_at - m.c - m.b * alpha_tilde) / (alpha_tilde * alpha_tilde);
  m.alpha_tilde = alpha_tilde;
  return m;
}

Scalar minimize_quadratic(const QuadModel & model, Scalar alpha_min, Scalar alpha_max)
{
  if (model.a > 0) { return std::clamp(-model.b / (2 * model.a), alpha_min, alpha_max); }
  return model(alpha_max) < model(alpha_min) ? alpha_max : alpha_min;
}

}  // namespace ofo
