#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "ofo/model.hpp"

namespace ofo {

using PlantWithConstraints = std::pair<PlantModel, ConstraintSet>;

/**
 * @brief Two-input toy problem.
 *
 * y = u2^3 + u1 - u2 + 0.5,
 * Phi = 1.5 u1^2 + u2^2 - u2^3 + u1 u2 - 3 u2 + 1.5 + y,
 * u in [-1, 1]^2, y in [0, 1].
 */
PlantWithConstraints toy_plant();

/// Rosenbrock valley: y = (10 (u2 - u1^2), 1 - u1), Phi = y1^2 + y2 (1 - u1).
PlantWithConstraints rosenbrock_plant();

/// Saturating-rational well curves f_i(u) = a_i u / (b_i + u) feeding two platforms.
struct GasLiftSurrogate
{
  Vector a;
  Vector b;
  Vector u_min;
  Vector u_max;
  Vector y_min;
  Vector y_max;
  /// Wells feeding platform 0; the rest feed platform 1.
  Index wells_platform_0 = 2;
  Scalar gas_budget = 26000;

  static GasLiftSurrogate defaults();
  static Vector default_u0();

  /// f_i(u_i)
  Scalar well_output(Index i, Scalar u) const;
  Scalar well_slope(Index i, Scalar u) const;
};

PlantWithConstraints gaslift_plant(const GasLiftSurrogate & config);

/// Van der Vusse reactor (concentration states only) with the standard case-study defaults.
struct CstrParams
{
  Scalar V = 700;
  Scalar k1 = 5.0 / 6.0;
  Scalar k2 = 5.0 / 3.0;
  Scalar k3 = 1.0 / 6.0;
  Scalar F_min = 0;
  Scalar F_max = 634;
  Scalar cAi_min = 0;
  Scalar cAi_max = 15;
  Scalar cA_min = 0;
  Scalar cA_max = 10;
  Scalar cB_min = 0;
  Scalar cB_max = 5;
  Scalar F0 = 350.15;
  Scalar cAi0 = 10.15;
  Scalar cA0 = 2.82;
  Scalar cB0 = 1.08;
  /// Control interval in minutes.
  Scalar dT = 1;
  /// RK4 substep in minutes.
  Scalar substep = 0.01;

  void validate() const;
};

/// Right-hand side (dcA/dt, dcB/dt) for state (cA, cB) and input (F, cAi).
Eigen::Vector2d cstr_rhs(const CstrParams & p, const Eigen::Vector2d & state, const Eigen::Vector2d & u);

/// Classical RK4 over dT with the given substep (the last substep is shortened to land on dT).
Eigen::Vector2d cstr_integrate(
  const CstrParams & p, const Eigen::Vector2d & state, const Eigen::Vector2d & u, Scalar dT, Scalar substep);

inline Eigen::Vector2d cstr_integrate(const CstrParams & p, const Eigen::Vector2d & state, const Eigen::Vector2d & u, Scalar dT)
{
  return cstr_integrate(p, state, u, dT, p.substep);
}

/// Steady state of the reactor for a constant input (positive root for cA).
Eigen::Vector2d cstr_steady_state(const CstrParams & p, const Eigen::Vector2d & u);

/// grad_h = -(dG/dy)^{-1} dG/du from the steady-state residuals, evaluated at (u, y).
Eigen::Matrix2d cstr_sensitivity(const CstrParams & p, const Eigen::Vector2d & u, const Eigen::Vector2d & y);

/// Piecewise-constant setpoint: value of the last breakpoint with time <= t.
struct Reference
{
  struct Breakpoint
  {
    Scalar time;
    Scalar value;
  };
  std::vector<Breakpoint> points;

  Scalar operator()(Scalar t) const;
};

/// Stateful reactor simulation; one instance per run.
class CstrSimulator
{
public:
  CstrSimulator(CstrParams params, Reference reference);

  const CstrParams & params() const { return params_; }
  const Reference & reference() const { return reference_; }
  Scalar time() const { return time_; }
  const Eigen::Vector2d & state() const { return state_; }
  Scalar setpoint() const { return reference_(time_); }

  /// Holds u over one control interval and returns the new (cA, cB).
  Eigen::Vector2d step(const Eigen::Vector2d & u);

private:
  CstrParams params_;
  Reference reference_;
  Eigen::Vector2d state_;
  Scalar time_ = 0;
};

/// Tracking plant Phi = (cB - r(t))^2; the returned model shares ownership of its simulator.
PlantWithConstraints cstr_plant(const CstrParams & params, const Reference & reference);
PlantWithConstraints cstr_plant(std::shared_ptr<CstrSimulator> sim);

}  // namespace ofo
