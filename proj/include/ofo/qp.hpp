#pragma once

#include <vector>

#include "ofo/model.hpp"

namespace ofo {

/**
 * @brief Per-iteration projection problem in expanded form
 *
 *   min_w  0.5 w' P w + q' w   s.t.  G w <= h
 *
 * with P = S^{-1}, q the reduced gradient, and G stacking the input rows
 * alpha_max * A followed by the output rows alpha_max * C * grad_h.
 */
struct QpData
{
  Matrix P;
  Vector q;
  Matrix G;
  Vector h;
  /// Rows [0, n_input_rows) of G come from A, the rest from C.
  Index n_input_rows = 0;
};

enum class QpStatus { optimal, infeasible, numerical_failure };

struct QpSolution
{
  Vector w;
  /// One multiplier per row of G, with P w + q + G' duals = 0 at optimality.
  Vector duals;
  std::vector<Index> active;
  QpStatus status = QpStatus::numerical_failure;
  Scalar kkt_residual = 0;
  int iterations = 0;
};

inline constexpr Scalar kActiveTol = 1e-7;
inline constexpr Scalar kMaxMetricCondition = 1e12;

/// Inverse of a symmetric positive definite metric. Throws IllConditionedMetricError.
Matrix metric_inverse(const Matrix & S);

QpData assemble_qp(
  const Matrix & S,
  const Vector & u,
  const Vector & y,
  const Vector & reduced_grad,
  const Matrix & grad_h,
  const ConstraintSet & cons,
  Scalar alpha_max);

/// Evaluates the plant at the state's (u, y) and assembles with state.S.
QpData assemble_qp(const ControllerState & state, const PlantModel & plant, const ConstraintSet & cons, Scalar alpha_max);

/**
 * @brief Solve the strictly convex QP with the Goldfarb-Idnani dual active-set method.
 *
 * The working set is polished by a direct solve of the equality-constrained
 * KKT system. Status is optimal only when the scaled KKT residual is <= tol.
 */
QpSolution solve_w(const QpData & qp, Scalar tol = 1e-8);

/// Scaled max-norm of stationarity, primal infeasibility and complementarity.
Scalar kkt_residual(const QpData & qp, const Vector & w, const Vector & duals);

}  // namespace ofo
