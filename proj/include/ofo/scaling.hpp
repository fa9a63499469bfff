#pragma once

#include "ofo/model.hpp"

namespace ofo {

enum class SdpResultStatus { optimal, infeasible, numerical_failure };

struct SdpResult
{
  Matrix deltaS;
  Scalar p = 0;
  Scalar t = 0;
  SdpResultStatus status = SdpResultStatus::numerical_failure;
};

/**
 * @brief Metric update maximizing the demanded linearized decrease plus the smallest eigenvalue.
 *
 *   min  -p - t
 *   s.t. <D, dS>_F <= -p,   S + dS - t I >= 0,   t_max I - (S + dS) >= 0,
 *        dS = dS',  p in [0, p_max],  t in [t_min, t_max]
 *
 * D is symmetrized first. With diagonal = true, dS is restricted to the
 * diagonal and the problem becomes a linear program (S must be diagonal).
 * The returned result satisfies the feasibility invariants to 1e-8 when
 * status is optimal; on solver failure deltaS is zero.
 */
SdpResult adapt_sdp(const Matrix & S, const ScalingSensitivity & D, const OfoParams & params, bool diagonal = false);

/// Multiplicative per-entry update: (1 + beta1) if D_i < 0, (1 - beta2) if D_i > 0, clamped to [t_min, t_max].
Vector adapt_heuristic(const Vector & S_diag, const Vector & D_diag, const OfoParams & params);

/// Same rule with beta1 = -beta2 = D_i / S_i, i.e. S_i + D_i for D_i != 0. Diagonal metrics only.
Vector adapt_ift_analogue(const Vector & S_diag, const Vector & D_diag, const OfoParams & params);

/// Checks the optimal-result invariants against S, D and params.
bool sdp_result_consistent(const Matrix & S, const ScalingSensitivity & D, const OfoParams & params, const SdpResult & r,
                           Scalar tol = 1e-8);

}  // namespace ofo
