#include "ofo/plants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ofo {

PlantWithConstraints toy_plant()
{
  PlantModel p;
  p.name    = "toy";
  p.n_u     = 2;
  p.n_y     = 1;
  p.measure = [](const Vector & u) {
    Vector y(1);
    y(0) = u(1) * u(1) * u(1) + u(0) - u(1) + 0.5;
    return y;
  };
  p.sensitivity = [](const Vector & u, const Vector &) {
    Matrix J(1, 2);
    J << 1.0, 3 * u(1) * u(1) - 1;
    return J;
  };
  p.objective = [](const Vector & u, const Vector & y) {
    const Scalar u1 = u(0), u2 = u(1);
    return 1.5 * u1 * u1 + u2 * u2 - u2 * u2 * u2 + u1 * u2 - 3 * u2 + 1.5 + y(0);
  };
  p.grad_u = [](const Vector & u, const Vector &) {
    const Scalar u1 = u(0), u2 = u(1);
    RowVector g(2);
    g << 3 * u1 + u2, 2 * u2 - 3 * u2 * u2 + u1 - 3;
    return g;
  };
  p.grad_y = [](const Vector &, const Vector &) { return RowVector::Ones(1).eval(); };

  const ConstraintSet cons = ConstraintSet::boxes(
    Vector::Constant(2, -1.0), Vector::Constant(2, 1.0), Vector::Zero(1), Vector::Ones(1));
  return {std::move(p), cons};
}

PlantWithConstraints rosenbrock_plant()
{
  PlantModel p;
  p.name    = "rosenbrock";
  p.n_u     = 2;
  p.n_y     = 2;
  p.measure = [](const Vector & u) {
    Vector y(2);
    y << 10 * (u(1) - u(0) * u(0)), 1 - u(0);
    return y;
  };
  p.sensitivity = [](const Vector & u, const Vector &) {
    Matrix J(2, 2);
    J << -20 * u(0), 10, -1, 0;
    return J;
  };
  p.objective = [](const Vector & u, const Vector & y) { return y(0) * y(0) + y(1) * (1 - u(0)); };
  p.grad_u    = [](const Vector &, const Vector & y) {
    RowVector g(2);
    g << -y(1), 0;
    return g;
  };
  p.grad_y = [](const Vector & u, const Vector & y) {
    RowVector g(2);
    g << 2 * y(0), 1 - u(0);
    return g;
  };

  Vector u_lo(2), u_hi(2);
  u_lo << -1, -1;
  u_hi << 1, 0.75;
  const ConstraintSet cons = ConstraintSet::boxes(u_lo, u_hi, Vector::Constant(2, -5.0), Vector::Constant(2, 5.0));
  return {std::move(p), cons};
}

// ---------------------------------------------------------------------------
// Gas lift

GasLiftSurrogate GasLiftSurrogate::defaults()
{
  GasLiftSurrogate g;
  g.a.resize(5);
  g.b.resize(5);
  g.a << 1680, 1200, 2080, 1520, 1840;
  g.b << 3000, 5000, 6000, 2500, 4000;
  g.u_min = Vector::Zero(5);
  g.u_max = Vector::Constant(5, 10000);
  g.y_min = Vector::Zero(2);
  g.y_max = Vector::Constant(2, 8000);
  return g;
}

Vector GasLiftSurrogate::default_u0()
{
  Vector u0(5);
  u0 << 2500, 7000, 4500, 4500, 4500;
  return u0;
}

Scalar GasLiftSurrogate::well_output(Index i, Scalar u) const { return a(i) * u / (b(i) + u); }

Scalar GasLiftSurrogate::well_slope(Index i, Scalar u) const
{
  const Scalar den = b(i) + u;
  return a(i) * b(i) / (den * den);
}

PlantWithConstraints gaslift_plant(const GasLiftSurrogate & config)
{
  const Index n = config.a.size();
  if (n == 0 || config.b.size() != n || config.u_min.size() != n || config.u_max.size() != n) {
    throw InvalidModelError("gas-lift surrogate: per-well vectors must share one nonzero length");
  }
  if (config.y_min.size() != 2 || config.y_max.size() != 2) {
    throw InvalidModelError("gas-lift surrogate: two platform bounds expected");
  }
  if (config.wells_platform_0 < 1 || config.wells_platform_0 >= n) {
    throw InvalidModelError("gas-lift surrogate: each platform needs at least one well");
  }
  if ((config.a.array() <= 0).any() || (config.b.array() <= 0).any() || (config.u_min.array() < 0).any()) {
    throw InvalidModelError("gas-lift surrogate: a_i, b_i must be positive and u_min nonnegative");
  }

  const Index split = config.wells_platform_0;
  PlantModel p;
  p.name    = "gaslift";
  p.n_u     = n;
  p.n_y     = 2;
  p.measure = [config, n, split](const Vector & u) {
    Vector y = Vector::Zero(2);
    for (Index i = 0; i < n; ++i) { y(i < split ? 0 : 1) += config.well_output(i, u(i)); }
    return y;
  };
  p.sensitivity = [config, n, split](const Vector & u, const Vector &) {
    Matrix J = Matrix::Zero(2, n);
    for (Index i = 0; i < n; ++i) { J(i < split ? 0 : 1, i) = config.well_slope(i, u(i)); }
    return J;
  };
  p.objective = [](const Vector &, const Vector & y) { return -y(0) - y(1); };
  p.grad_u    = [n](const Vector &, const Vector &) { return RowVector::Zero(n).eval(); };
  p.grad_y    = [](const Vector &, const Vector &) { return RowVector::Constant(2, -1.0).eval(); };

  ConstraintSet cons = ConstraintSet::boxes(config.u_min, config.u_max, config.y_min, config.y_max);
  cons.A.conservativeResize(cons.A.rows() + 1, Eigen::NoChange);
  cons.A.row(cons.A.rows() - 1).setOnes();
  cons.b.conservativeResize(cons.b.size() + 1);
  cons.b(cons.b.size() - 1) = config.gas_budget;
  return {std::move(p), cons};
}

// ---------------------------------------------------------------------------
// CSTR

void CstrParams::validate() const
{
  const bool ok = V > 0 && k1 > 0 && k2 > 0 && k3 > 0 && F_max > F_min && F_min >= 0 && cAi_max > cAi_min
               && cAi_min >= 0 && cA_max > cA_min && cB_max > cB_min && dT > 0 && substep > 0;
  if (!ok) { throw ConfigError("cstr: parameters must be positive with nonempty bounds"); }
}

Eigen::Vector2d cstr_rhs(const CstrParams & p, const Eigen::Vector2d & x, const Eigen::Vector2d & u)
{
  const Scalar dil = u(0) / p.V;
  return {dil * (u(1) - x(0)) - p.k1 * x(0) - p.k3 * x(0) * x(0), -dil * x(1) + p.k1 * x(0) - p.k2 * x(1)};
}

Eigen::Vector2d cstr_integrate(
  const CstrParams & p, const Eigen::Vector2d & state, const Eigen::Vector2d & u, Scalar dT, Scalar substep)
{
  if (!(dT > 0) || !(substep > 0)) { throw IntegrationError("cstr_integrate: dT and substep must be positive"); }
  Eigen::Vector2d x = state;
  // Integer substep count avoids drift from accumulating t += h.
  const auto steps = static_cast<long>(std::ceil(dT / substep - 1e-9));
  for (long s = 0; s < steps; ++s) {
    const Scalar h          = std::min(substep, dT - static_cast<Scalar>(s) * substep);
    const Eigen::Vector2d k1 = cstr_rhs(p, x, u);
    const Eigen::Vector2d k2 = cstr_rhs(p, x + 0.5 * h * k1, u);
    const Eigen::Vector2d k3 = cstr_rhs(p, x + 0.5 * h * k2, u);
    const Eigen::Vector2d k4 = cstr_rhs(p, x + h * k3, u);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  if (!x.allFinite()) { throw IntegrationError("cstr_integrate: state became non-finite"); }
  return x;
}

Eigen::Vector2d cstr_steady_state(const CstrParams & p, const Eigen::Vector2d & u)
{
  const Scalar dil = u(0) / p.V;
  // k3 cA^2 + (dil + k1) cA - dil cAi = 0
  const Scalar bq = dil + p.k1;
  const Scalar cq = -dil * u(1);
  const Scalar disc = bq * bq - 4 * p.k3 * cq;
  // Stable form of the positive root.
  const Scalar cA = -2 * cq / (bq + std::sqrt(disc));
  const Scalar cB = p.k1 * cA / (dil + p.k2);
  return {cA, cB};
}

Eigen::Matrix2d cstr_sensitivity(const CstrParams & p, const Eigen::Vector2d & u, const Eigen::Vector2d & y)
{
  const Scalar dil = u(0) / p.V;
  Eigen::Matrix2d dG_dy;
  dG_dy << -dil - p.k1 - 2 * p.k3 * y(0), 0, p.k1, -dil - p.k2;
  Eigen::Matrix2d dG_du;
  dG_du << (u(1) - y(0)) / p.V, dil, -y(1) / p.V, 0;
  if (std::abs(dG_dy.determinant()) < 1e-14) { throw InvalidModelError("cstr_sensitivity: singular dG/dy"); }
  return -dG_dy.inverse() * dG_du;
}

Scalar Reference::operator()(Scalar t) const
{
  if (points.empty()) { throw ConfigError("reference: no breakpoints"); }
  Scalar r = points.front().value;
  for (const auto & bp : points) {
    if (bp.time <= t + 1e-9) { r = bp.value; }
  }
  return r;
}

CstrSimulator::CstrSimulator(CstrParams params, Reference reference)
  : params_(params), reference_(std::move(reference)), state_(params.cA0, params.cB0)
{
  params_.validate();
  if (reference_.points.empty()) { throw ConfigError("cstr: reference trajectory is empty"); }
}

Eigen::Vector2d CstrSimulator::step(const Eigen::Vector2d & u)
{
  state_ = cstr_integrate(params_, state_, u, params_.dT);
  time_ += params_.dT;
  return state_;
}

PlantWithConstraints cstr_plant(const CstrParams & params, const Reference & reference)
{
  return cstr_plant(std::make_shared<CstrSimulator>(params, reference));
}

PlantWithConstraints cstr_plant(std::shared_ptr<CstrSimulator> sim)
{
  const CstrParams & cp = sim->params();
  PlantModel p;
  p.name           = "cstr";
  p.n_u            = 2;
  p.n_y            = 2;
  p.measure        = [sim](const Vector & u) -> Vector { return sim->step(u.head<2>()); };
  p.initial_output = [sim](const Vector &) -> Vector { return sim->state(); };
  p.sensitivity    = [cp](const Vector & u, const Vector & y) -> Matrix {
    return cstr_sensitivity(cp, u.head<2>(), y.head<2>());
  };
  p.objective = [sim](const Vector &, const Vector & y) {
    const Scalar e = y(1) - sim->setpoint();
    return e * e;
  };
  p.grad_u = [](const Vector &, const Vector &) { return RowVector::Zero(2).eval(); };
  p.grad_y = [sim](const Vector &, const Vector & y) {
    RowVector g(2);
    g << 0, 2 * (y(1) - sim->setpoint());
    return g;
  };

  Eigen::Vector2d u_lo(cp.F_min, cp.cAi_min), u_hi(cp.F_max, cp.cAi_max);
  Eigen::Vector2d y_lo(cp.cA_min, cp.cB_min), y_hi(cp.cA_max, cp.cB_max);
  return {std::move(p), ConstraintSet::boxes(u_lo, u_hi, y_lo, y_hi)};
}

}  // namespace ofo
