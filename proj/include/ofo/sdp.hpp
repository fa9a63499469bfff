#pragma once

#include <vector>

#include "ofo/types.hpp"

namespace ofo {

/**
 * @brief Dense block-diagonal semidefinite program in dual form
 *
 *   maximize  b' y   s.t.  Z = C - sum_i y_i A_i  >= 0  (blockwise PSD)
 *
 * with primal  minimize <C, X>  s.t. <A_i, X> = b_i, X >= 0.
 * A 1x1 block is an ordinary linear inequality.
 */
struct SdpProblem
{
  std::vector<Index> block_sizes;
  /// C[blk]
  std::vector<Matrix> C;
  /// A[i][blk], one entry per variable and block (zero matrices allowed).
  std::vector<std::vector<Matrix>> A;
  Vector b;

  Index n_vars() const { return b.size(); }
  Index n_blocks() const { return static_cast<Index>(block_sizes.size()); }

  /// Appends a block and returns its index; coefficient matrices start at zero.
  Index add_block(Index size, Matrix c);
};

struct SdpSettings
{
  int max_iter = 100;
  /// Relative primal/dual infeasibility and duality gap.
  Scalar tol = 1e-10;
  /// Fraction of the distance to the cone boundary taken per step.
  Scalar step_fraction = 0.98;
};

enum class SdpStatus { optimal, infeasible, numerical_failure };

struct SdpSolution
{
  Vector y;
  std::vector<Matrix> X;
  std::vector<Matrix> Z;
  Scalar primal_objective = 0;
  Scalar dual_objective = 0;
  SdpStatus status = SdpStatus::numerical_failure;
  int iterations = 0;
};

/// Infeasible-start primal-dual path following (HKM direction, Mehrotra predictor-corrector).
SdpSolution solve_sdp(const SdpProblem & problem, const SdpSettings & settings = {});

}  // namespace ofo
