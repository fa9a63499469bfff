#include "ofo/sensitivity.hpp"

#include <algorithm>
#include <cmath>

namespace ofo {

QpJacobians qp_solution_jacobians(
  const QpData & qp,
  const QpSolution & sol,
  const Matrix & S,
  const Vector & g,
  const QpStateDerivatives * state_derivs,
  bool diagonal_only)
{
  const Index n = qp.P.rows();
  QpJacobians jac;
  jac.dw_dvecS = Matrix::Zero(n, n * n);
  jac.valid    = false;
  if (sol.status != QpStatus::optimal || S.rows() != n || g.size() != n) { return jac; }

  const std::vector<Index> & act = sol.active;
  const Index q = static_cast<Index>(act.size());
  for (Index j : act) {
    if (sol.duals(j) < kComplementarityMargin) { return jac; }
  }

  Matrix K = Matrix::Zero(n + q, n + q);
  K.topLeftCorner(n, n) = qp.P;
  for (Index r = 0; r < q; ++r) {
    K.block(0, n + r, n, 1) = qp.G.row(act[r]).transpose();
    K.block(n + r, 0, 1, n) = qp.G.row(act[r]);
  }
  Eigen::FullPivLU<Matrix> lu(K);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) { return jac; }

  const Vector & w  = sol.w;
  const Vector Pw   = qp.P * w;
  Vector lam_act(q);
  for (Index r = 0; r < q; ++r) { lam_act(r) = sol.duals(act[r]); }

  // S_ij: top rhs = P E_ij P w = P.col(i) * (P w)_j.
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (diagonal_only && i != j) { continue; }
      Vector rhs = Vector::Zero(n + q);
      rhs.head(n) = qp.P.col(i) * Pw(j);
      jac.dw_dvecS.col(j * n + i) = lu.solve(rhs).head(n);
    }
  }

  if (state_derivs != nullptr) {
    const auto respond = [&](const QpDataDerivative & dd) -> Vector {
      Vector rhs(n + q);
      rhs.head(n) = -dd.dq;
      for (Index r = 0; r < q; ++r) {
        rhs.head(n) -= dd.dG.row(act[r]).transpose() * lam_act(r);
        rhs(n + r) = dd.dh(act[r]) - dd.dG.row(act[r]).dot(w);
      }
      return lu.solve(rhs).head(n);
    };
    jac.dw_du.resize(n, static_cast<Index>(state_derivs->du.size()));
    jac.dw_dy.resize(n, static_cast<Index>(state_derivs->dy.size()));
    for (std::size_t c = 0; c < state_derivs->du.size(); ++c) {
      jac.dw_du.col(static_cast<Index>(c)) = respond(state_derivs->du[c]);
    }
    for (std::size_t c = 0; c < state_derivs->dy.size(); ++c) {
      jac.dw_dy.col(static_cast<Index>(c)) = respond(state_derivs->dy[c]);
    }
    jac.has_state_derivatives = true;
  }

  jac.valid = jac.dw_dvecS.allFinite() && (!jac.has_state_derivatives || (jac.dw_du.allFinite() && jac.dw_dy.allFinite()));
  return jac;
}

QpStateDerivatives qp_state_derivatives(
  const PlantModel & plant,
  const ConstraintSet & cons,
  const Matrix & S,
  const Vector & u,
  const Vector & y,
  Scalar alpha_max)
{
  const auto assemble_at = [&](const Vector & uu, const Vector & yy) {
    const Matrix grad_h = plant.sensitivity(uu, yy);
    return assemble_qp(S, uu, yy, reduced_gradient(plant, uu, yy, grad_h), grad_h, cons, alpha_max);
  };
  const auto central = [&](const Vector & uu_p, const Vector & yy_p, const Vector & uu_m, const Vector & yy_m, Scalar h) {
    const QpData plus = assemble_at(uu_p, yy_p), minus = assemble_at(uu_m, yy_m);
    return QpDataDerivative{(plus.q - minus.q) / (2 * h), (plus.G - minus.G) / (2 * h), (plus.h - minus.h) / (2 * h)};
  };

  QpStateDerivatives out;
  for (Index i = 0; i < u.size(); ++i) {
    const Scalar h = 1e-6 * std::max(Scalar(1), std::abs(u(i)));
    Vector up = u, um = u;
    up(i) += h;
    um(i) -= h;
    out.du.push_back(central(up, y, um, y, h));
  }
  for (Index i = 0; i < y.size(); ++i) {
    const Scalar h = 1e-6 * std::max(Scalar(1), std::abs(y(i)));
    Vector yp = y, ym = y;
    yp(i) += h;
    ym(i) -= h;
    out.dy.push_back(central(u, yp, u, ym, h));
  }
  return out;
}

std::optional<ScalingSensitivity> objective_scaling_sensitivity(
  const PlantModel & plant, const ControllerState & state_next, const QpJacobians & jac, Scalar alpha)
{
  if (!jac.valid) { return std::nullopt; }
  const Index n = jac.dw_dvecS.rows();
  const Vector g_next = state_next.reduced_grad.size() == n ? state_next.reduced_grad
                                                            : reduced_gradient(plant, state_next.u, state_next.y);
  const RowVector flat = alpha * g_next.transpose() * jac.dw_dvecS;
  const Matrix D       = Eigen::Map<const Matrix>(flat.data(), n, n);
  ScalingSensitivity out{0.5 * (D + D.transpose())};
  if (!out.D.allFinite()) { throw InvalidModelError("non-finite scaling sensitivity"); }
  return out;
}

Matrix accumulate_input_sensitivity(const std::vector<SensitivityStep> & history, std::size_t l)
{
  const std::size_t k = history.size();
  if (l > k) { throw Error("accumulate_input_sensitivity: l beyond the history"); }
  if (k == 0 || l == k) {
    const Index n = k == 0 ? 0 : history.front().jac.dw_dvecS.rows();
    return Matrix::Zero(n, n * n);
  }
  const Index n = history[l].jac.dw_dvecS.rows();
  Matrix X      = Matrix::Zero(n, n * n);
  for (std::size_t m = l; m < k; ++m) {
    const SensitivityStep & step = history[m];
    if (!step.jac.valid) { throw Error("accumulate_input_sensitivity: invalid jacobian in window"); }
    Matrix dX = Matrix::Zero(n, n * n);
    if (m == l) { dX += step.jac.dw_dvecS; }
    if (m > l) {
      if (!step.jac.has_state_derivatives) {
        throw Error("accumulate_input_sensitivity: state derivatives required beyond the first step");
      }
      const Matrix total = step.jac.dw_du + step.jac.dw_dy * step.grad_h;
      dX += total * X;
    }
    X += step.alpha * dX;
  }
  return X;
}

}  // namespace ofo
