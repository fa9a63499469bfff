#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ofo/controller.hpp"
#include "ofo/qp.hpp"

namespace ofo::oracle {

inline constexpr unsigned kSeed = 20240517u;

/// Solves the QP by trying every subset of rows as the active set.
inline Vector enumerate_qp(const QpData & qp, bool * found = nullptr)
{
  const Index n = qp.P.rows();
  const Index m = qp.G.rows();
  Vector best;
  Scalar best_obj = std::numeric_limits<Scalar>::infinity();
  for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
    std::vector<Index> rows;
    for (Index i = 0; i < m; ++i) {
      if (mask & (1ul << i)) { rows.push_back(i); }
    }
    const Index a = static_cast<Index>(rows.size());
    if (a > n) { continue; }
    Matrix K = Matrix::Zero(n + a, n + a);
    Vector r(n + a);
    K.topLeftCorner(n, n) = qp.P;
    r.head(n)             = -qp.q;
    for (Index k = 0; k < a; ++k) {
      K.block(0, n + k, n, 1) = qp.G.row(rows[k]).transpose();
      K.block(n + k, 0, 1, n) = qp.G.row(rows[k]);
      r(n + k)                = qp.h(rows[k]);
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < n + a) { continue; }
    const Vector z = lu.solve(r);
    const Vector w = z.head(n);
    if ((z.tail(a).array() < -1e-10).any()) { continue; }
    if (m > 0 && ((qp.G * w - qp.h).array() > 1e-9).any()) { continue; }
    const Scalar obj = 0.5 * w.dot(qp.P * w) + qp.q.dot(w);
    if (obj < best_obj) {
      best_obj = obj;
      best     = w;
    }
  }
  if (found) { *found = best.size() == n; }
  return best;
}

/// Optimal value of max p + t for the metric update, from the spectrum of D.
inline Scalar sdp_optimal_value(const Matrix & S, const Matrix & D_in, const OfoParams & params, bool diagonal)
{
  const Matrix D = 0.5 * (D_in + D_in.transpose());
  Vector lam;
  if (diagonal) {
    lam = D.diagonal();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(D);
    lam = es.eigenvalues();
  }
  const Scalar pos = lam.cwiseMax(0.0).sum();
  const Scalar neg = lam.cwiseMin(0.0).sum();
  const Scalar c   = diagonal ? D.diagonal().dot(S.diagonal()) : D.cwiseProduct(S).sum();
  // Largest linearized decrease achievable for a given lower eigenvalue bound t.
  auto decrease = [&](Scalar t) { return c - t * pos - params.t_max * neg; };

  std::vector<Scalar> ts = {params.t_min, params.t_max};
  if (pos > 0) {
    ts.push_back((c - params.t_max * neg - params.p_max) / pos);
    ts.push_back((c - params.t_max * neg) / pos);
  }
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Scalar t : ts) {
    t = std::clamp(t, params.t_min, params.t_max);
    const Scalar p = std::min(params.p_max, decrease(t));
    if (p < -1e-12) { continue; }
    best = std::max(best, std::max(p, Scalar(0)) + t);
  }
  return best;
}

/// Phi after one fixed-step controller move from (u, y) with metric S.
inline Scalar one_step_objective(PlantModel & plant, const ConstraintSet & cons, const Matrix & S, const Vector & u,
                                 const Vector & y, Scalar alpha, Scalar alpha_max)
{
  const Matrix grad_h = plant.sensitivity(u, y);
  const Vector g      = reduced_gradient(plant, u, y, grad_h);
  const QpSolution s  = solve_w(assemble_qp(S, u, y, g, grad_h, cons, alpha_max));
  const Vector u1     = u + alpha * s.w;
  return plant.objective(u1, plant.measure(u1));
}

/**
 * @brief Central differences of the one-step objective in symmetric directions.
 *
 * Entry (i, j) is half the derivative along E_ij + E_ji for i != j, which is
 * what a symmetrized dPhi/dS holds.
 */
inline Matrix one_step_fd(PlantModel & plant, const ConstraintSet & cons, const Matrix & S, const Vector & u,
                          const Vector & y, Scalar alpha, Scalar alpha_max, Scalar eps, bool diagonal_only)
{
  const Index n = S.rows();
  Matrix out    = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      if (diagonal_only && i != j) { continue; }
      Matrix E = Matrix::Zero(n, n);
      E(i, j)  = 1;
      E(j, i)  = 1;
      const Scalar fp = one_step_objective(plant, cons, S + eps * E, u, y, alpha, alpha_max);
      const Scalar fm = one_step_objective(plant, cons, S - eps * E, u, y, alpha, alpha_max);
      const Scalar d  = (fp - fm) / (2 * eps);
      out(i, j)       = i == j ? d : 0.5 * d;
      out(j, i)       = out(i, j);
    }
  }
  return out;
}

/// u after `steps` fixed-step moves, all using metric S for the first move and S_rest afterwards.
inline Vector multi_step_input(PlantModel & plant, const ConstraintSet & cons, const Matrix & S_first,
                               const Matrix & S_rest, Vector u, Scalar alpha, Scalar alpha_max, int steps)
{
  for (int s = 0; s < steps; ++s) {
    const Vector y      = plant.measure(u);
    const Matrix grad_h = plant.sensitivity(u, y);
    const Vector g      = reduced_gradient(plant, u, y, grad_h);
    const QpSolution q  = solve_w(assemble_qp(s == 0 ? S_first : S_rest, u, y, g, grad_h, cons, alpha_max));
    u += alpha * q.w;
  }
  return u;
}

inline Matrix random_spd(std::mt19937 & rng, Index n, Scalar lo, Scalar hi)
{
  std::uniform_real_distribution<Scalar> U(-1, 1), L(lo, hi);
  Matrix M = Matrix::NullaryExpr(n, n, [&]() { return U(rng); });
  Eigen::HouseholderQR<Matrix> qr(M);
  const Matrix Q = qr.householderQ();
  Vector lam(n);
  for (Index i = 0; i < n; ++i) { lam(i) = L(rng); }
  Matrix S = Q * lam.asDiagonal() * Q.transpose();
  return 0.5 * (S + S.transpose());
}

inline Vector random_vector(std::mt19937 & rng, Index n, Scalar lo, Scalar hi)
{
  std::uniform_real_distribution<Scalar> U(lo, hi);
  return Vector::NullaryExpr(n, [&]() { return U(rng); });
}

/// Relative error with an absolute floor for small reference values.
inline bool close(Scalar value, Scalar ref, Scalar rel, Scalar abs_floor_below, Scalar abs_tol)
{
  if (std::abs(ref) < abs_floor_below) { return std::abs(value - ref) <= abs_tol; }
  return std::abs(value - ref) <= rel * std::abs(ref);
}

}  // namespace ofo::oracle
