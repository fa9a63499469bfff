#pragma once

#include <optional>
#include <vector>

#include "ofo/model.hpp"
#include "ofo/qp.hpp"

namespace ofo {

/// Derivative of (q, G, h) with respect to one scalar parameter of the QP.
struct QpDataDerivative
{
  Vector dq;
  Matrix dG;
  Vector dh;
};

/// Derivatives of the QP data with respect to each entry of u and of y.
struct QpStateDerivatives
{
  std::vector<QpDataDerivative> du;
  std::vector<QpDataDerivative> dy;
};

/**
 * @brief Derivatives of the QP minimizer with the active set held fixed.
 *
 * Columns of dw_dvecS follow vec(S), i.e. entry (i, j) of S maps to column
 * j * n_u + i. dw_du and dw_dy are only filled when state derivatives were
 * supplied.
 */
struct QpJacobians
{
  Matrix dw_dvecS;
  Matrix dw_du;
  Matrix dw_dy;
  bool has_state_derivatives = false;
  bool valid = false;
};

inline constexpr Scalar kComplementarityMargin = 1e-9;

/**
 * @brief Implicit differentiation of P w + q + G_a' lambda_a = 0, G_a w = h_a.
 *
 * Uses d(S^{-1}) = -S^{-1} dS S^{-1}. Returns valid = false when the active
 * rows are rank deficient or an active multiplier is below the strict
 * complementarity margin. With diagonal_only, only the columns of the
 * diagonal entries of S are computed (the rest stay zero).
 */
QpJacobians qp_solution_jacobians(
  const QpData & qp,
  const QpSolution & sol,
  const Matrix & S,
  const Vector & g,
  const QpStateDerivatives * state_derivs = nullptr,
  bool diagonal_only = false);

/// Central finite differences of assemble_qp in each entry of u and y.
QpStateDerivatives qp_state_derivatives(
  const PlantModel & plant,
  const ConstraintSet & cons,
  const Matrix & S,
  const Vector & u,
  const Vector & y,
  Scalar alpha_max);

/**
 * @brief One-step sensitivity of the objective to the metric.
 *
 * D_ij = g(u^{k+1}, y^{k+1})' * alpha * dw^k/dS_ij, symmetrized. Uses
 * state_next.reduced_grad when it is populated. Returns nullopt for
 * invalid jacobians.
 */
std::optional<ScalingSensitivity> objective_scaling_sensitivity(
  const PlantModel & plant, const ControllerState & state_next, const QpJacobians & jac, Scalar alpha);

/// One controller step as needed for multi-step accumulation.
struct SensitivityStep
{
  Scalar alpha = 0;
  QpJacobians jac;
  /// Plant sensitivity at the step's input, used to chain dw/dy into dw/du.
  Matrix grad_h;
};

/**
 * @brief d u^k / d vec(S^l) accumulated over history[l .. k-1], k = history.size().
 *
 * Later directions respond to S^l through the inputs they are computed at:
 * X_{m+1} = X_m + alpha^m ((dw_du + dw_dy grad_h) X_m + [m == l] dw_dvecS).
 * Throws Error when a jacobian in the window is invalid or lacks state
 * derivatives beyond the first step.
 */
Matrix accumulate_input_sensitivity(const std::vector<SensitivityStep> & history, std::size_t l);

}  // namespace ofo
