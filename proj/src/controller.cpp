#include "ofo/controller.hpp"

#include "ofo/scaling.hpp"
#include "ofo/sensitivity.hpp"
#include "ofo/step.hpp"

namespace ofo {

std::string_view to_string(Termination t)
{
  switch (t) {
  case Termination::max_iters: return "max-iters";
  case Termination::converged: return "converged";
  case Termination::error: return "error";
  }
  return "unknown";
}

ControllerState initial_state(PlantModel & plant, const OfoParams & params, const Vector & u0)
{
  ControllerState s;
  s.k     = 0;
  s.u     = u0;
  s.y     = plant.initial_output ? plant.initial_output(u0) : plant.measure(u0);
  s.w     = Vector::Zero(plant.n_u);
  s.alpha = params.alpha0;
  s.S     = params.S0;
  s.reduced_grad = reduced_gradient(plant, s.u, s.y);
  return s;
}

IterationRecord initial_record(const PlantModel & plant, const ControllerState & state)
{
  IterationRecord r;
  r.k      = state.k;
  r.u      = state.u;
  r.y      = state.y;
  r.phi    = plant.objective(state.u, state.y);
  r.w      = Vector::Zero(state.u.size());
  r.alpha  = state.alpha;
  r.S      = state.S;
  r.S_eigs = symmetric_eigenvalues(state.S);
  r.D      = Matrix::Zero(state.u.size(), state.u.size());
  return r;
}

std::pair<ControllerState, IterationRecord> ofo_iteration(
  const ControllerState & state, PlantModel & plant, const ConstraintSet & cons, const OfoParams & params)
{
  const Index n = plant.n_u;
  const Matrix grad_h = plant.sensitivity(state.u, state.y);
  const Vector g      = state.reduced_grad.size() == n ? state.reduced_grad : reduced_gradient(plant, state.u, state.y, grad_h);

  // Adaptation of the metric.
  Matrix S     = state.S;
  bool adapted = false;
  const bool trigger = params.mode != AdaptationMode::fixed && state.dPhi_dS.has_value() && state.w.size() == n
                    && g.dot(state.w) < 0;
  if (trigger) {
    switch (params.mode) {
    case AdaptationMode::sdp_full:
    case AdaptationMode::sdp_diagonal: {
      const SdpResult r = adapt_sdp(S, *state.dPhi_dS, params, params.mode == AdaptationMode::sdp_diagonal);
      if (r.status == SdpResultStatus::optimal) {
        S       = S + r.deltaS;
        S       = (0.5 * (S + S.transpose())).eval();
        adapted = true;
      }
      break;
    }
    case AdaptationMode::heuristic_diagonal:
      S       = adapt_heuristic(S.diagonal(), state.dPhi_dS->D.diagonal(), params).asDiagonal();
      adapted = true;
      break;
    case AdaptationMode::fixed: break;
    }
  }

  // Projection QP.
  const QpData qp      = assemble_qp(S, state.u, state.y, g, grad_h, cons, params.alpha_max);
  const QpSolution sol = solve_w(qp);
  const bool qp_ok     = sol.status == QpStatus::optimal;
  const Vector w       = qp_ok ? sol.w : Vector::Zero(n);

  // Step size.
  Scalar alpha = params.alpha0;
  if (!qp_ok) {
    alpha = state.alpha;
  } else if (params.step_adaptation) {
    const Scalar alpha_tilde = state.alpha;
    const Scalar phi0        = plant.objective(state.u, state.y);
    const Scalar phi_at = plant.objective(state.u + alpha_tilde * w, state.y + alpha_tilde * (grad_h * w));
    const QuadModel model = fit_quadratic(phi0, g.dot(w), phi_at, alpha_tilde);
    alpha                 = minimize_quadratic(model, params.alpha_min, params.alpha_max);
  }

  // Apply and measure.
  ControllerState next;
  next.k     = state.k + 1;
  next.u     = state.u + alpha * w;
  next.y     = plant.measure(next.u);
  next.w     = w;
  next.alpha = alpha;
  next.S     = S;
  next.reduced_grad = reduced_gradient(plant, next.u, next.y);
  if (!next.u.allFinite() || !next.y.allFinite()) { throw InvalidModelError("plant returned a non-finite measurement"); }

  std::vector<Index> active;
  if (qp_ok) {
    active = sol.active;
    for (Index j : sol.active) {
      if (j < qp.n_input_rows) {
        next.active_inputs.push_back(j);
      } else {
        next.active_outputs.push_back(j - qp.n_input_rows);
      }
    }
    const QpJacobians jac = qp_solution_jacobians(qp, sol, S, g, nullptr, is_diagonal(params.mode));
    next.dPhi_dS          = objective_scaling_sensitivity(plant, next, jac, alpha);
  }

  IterationRecord rec;
  rec.k                  = next.k;
  rec.u                  = next.u;
  rec.y                  = next.y;
  rec.phi                = plant.objective(next.u, next.y);
  rec.w                  = w;
  rec.alpha              = alpha;
  rec.S                  = S;
  rec.S_eigs             = symmetric_eigenvalues(S);
  rec.D                  = next.dPhi_dS ? next.dPhi_dS->D : Matrix::Zero(n, n);
  rec.D_norm             = rec.D.norm();
  rec.active_constraints = std::move(active);
  rec.adapted            = adapted;
  rec.qp_failed          = !qp_ok;
  return {std::move(next), std::move(rec)};
}

RunTrace run(
  PlantModel & plant,
  const ConstraintSet & cons,
  const OfoParams & params,
  const Vector & u0,
  Index n_iters,
  const RunOptions & options)
{
  params.validate(plant.n_u);
  cons.validate(plant.n_u, plant.n_y);
  if (u0.size() != plant.n_u) { throw ConfigError("u0 has the wrong dimension"); }
  if (cons.A.rows() > 0 && ((cons.A * u0 - cons.b).array() > 1e-9).any()) {
    throw ConfigError("u0 violates the input constraints");
  }

  RunTrace trace;
  trace.params   = params;
  trace.plant_id = plant.name;

  ControllerState state;
  try {
    state = initial_state(plant, params, u0);
    trace.records.push_back(initial_record(plant, state));
  } catch (const Error & e) {
    trace.termination = Termination::error;
    trace.error       = e.what();
    return trace;
  }

  int quiet_steps = 0;
  for (Index it = 0; it < n_iters; ++it) {
    try {
      auto [next, rec] = ofo_iteration(state, plant, cons, params);
      state            = std::move(next);
      const bool quiet = rec.w.norm() <= 1e-9 && !rec.adapted && !rec.qp_failed;
      trace.records.push_back(std::move(rec));
      quiet_steps = quiet ? quiet_steps + 1 : 0;
    } catch (const Error & e) {
      trace.termination = Termination::error;
      trace.error       = e.what();
      return trace;
    }
    if (options.stop_on_convergence && quiet_steps >= 5) {
      trace.termination = Termination::converged;
      return trace;
    }
  }
  trace.termination = Termination::max_iters;
  return trace;
}

}  // namespace ofo
