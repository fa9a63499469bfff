#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ofo/model.hpp"
#include "ofo/qp.hpp"

namespace ofo {

/// One row of a simulation trace. Record k holds the iterate u^k and the step that produced it.
struct IterationRecord
{
  Index k = 0;
  Vector u;
  Vector y;
  Scalar phi = 0;
  /// Direction of the step that produced u^k (zero for the initial record).
  Vector w;
  Scalar alpha = 0;
  /// Metric used by that step and its ascending eigenvalues.
  Matrix S;
  Vector S_eigs;
  /// Sensitivity of the objective at u^k to that step's metric (zero when unavailable).
  Matrix D;
  Scalar D_norm = 0;
  std::vector<Index> active_constraints;
  bool adapted = false;
  bool qp_failed = false;
};

enum class Termination { max_iters, converged, error };

std::string_view to_string(Termination t);

struct RunTrace
{
  std::vector<IterationRecord> records;
  OfoParams params;
  std::string plant_id;
  Termination termination = Termination::max_iters;
  std::string error;
};

/// Initial controller state: measures y0 = plant.measure(u0).
ControllerState initial_state(PlantModel & plant, const OfoParams & params, const Vector & u0);

IterationRecord initial_record(const PlantModel & plant, const ControllerState & state);

/**
 * @brief One OFO iteration with adaptive tuning.
 *
 * In order: adapt S when the previous direction is still a descent
 * direction at the current point and a sensitivity is available; solve the
 * projection QP; choose alpha from the quadratic fit (or alpha0); apply
 * u + alpha w and measure; compute dPhi/dS for the next iteration.
 * An infeasible QP holds u (w = 0) and flags the record.
 */
std::pair<ControllerState, IterationRecord> ofo_iteration(
  const ControllerState & state, PlantModel & plant, const ConstraintSet & cons, const OfoParams & params);

struct RunOptions
{
  /// Stop once ||w|| <= 1e-9 without adaptation for 5 consecutive steps.
  bool stop_on_convergence = true;
};

/// Runs n_iters iterations (fewer on convergence or error). Throws ConfigError if A u0 > b.
RunTrace run(
  PlantModel & plant,
  const ConstraintSet & cons,
  const OfoParams & params,
  const Vector & u0,
  Index n_iters,
  const RunOptions & options = {});

}  // namespace ofo
