#include "ofo/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ofo/sdp.hpp"

namespace ofo {

namespace {

// Basis of symmetric perturbations: E_ii, or E_ij + E_ji for i < j.
struct SymBasis
{
  Index i, j;
};

Matrix basis_matrix(Index n, const SymBasis & e)
{
  Matrix E = Matrix::Zero(n, n);
  E(e.i, e.j) = 1;
  E(e.j, e.i) = 1;
  return E;
}

}  // namespace

SdpResult adapt_sdp(const Matrix & S, const ScalingSensitivity & sens, const OfoParams & params, bool diagonal)
{
  const Index n = S.rows();
  const Matrix D = 0.5 * (sens.D + sens.D.transpose());

  SdpResult res;
  res.deltaS = Matrix::Zero(n, n);
  res.p      = 0;
  res.t      = params.t_min;
  if (diagonal && !S.isDiagonal(0.0)) { throw Error("adapt_sdp: diagonal mode needs a diagonal metric"); }
  if (!D.allFinite()) { return res; }

  // Work in units of t_max for the metric and of p_max for p.
  const Scalar tau = params.t_max;
  const Scalar pi  = params.p_max;
  const bool with_p = D.cwiseAbs().maxCoeff() > 0;

  std::vector<SymBasis> basis;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      if (!diagonal || i == j) { basis.push_back({i, j}); }
    }
  }
  const Index n_ds  = static_cast<Index>(basis.size());
  const Index var_p = with_p ? n_ds : -1;
  const Index var_t = with_p ? n_ds + 1 : n_ds;
  const Index m     = var_t + 1;

  SdpProblem pb;
  pb.A.assign(static_cast<std::size_t>(m), {});
  pb.b = Vector::Zero(m);
  const Scalar obj_scale = std::max(tau, pi);
  pb.b(var_t)            = tau / obj_scale;
  if (with_p) { pb.b(var_p) = pi / obj_scale; }

  const Matrix S_scaled = S / tau;
  // Eigenvalue bounds: S + dS - t I >= 0 and I - S - dS >= 0 (scaled).
  if (diagonal) {
    for (Index i = 0; i < n; ++i) {
      const Index lo = pb.add_block(1, Matrix::Constant(1, 1, S_scaled(i, i)));
      const Index hi = pb.add_block(1, Matrix::Constant(1, 1, 1 - S_scaled(i, i)));
      pb.A[i][lo](0, 0)     = -1;
      pb.A[i][hi](0, 0)     = 1;
      pb.A[var_t][lo](0, 0) = 1;
    }
  } else {
    const Index lo = pb.add_block(n, S_scaled);
    const Index hi = pb.add_block(n, Matrix::Identity(n, n) - S_scaled);
    for (Index v = 0; v < n_ds; ++v) {
      const Matrix E = basis_matrix(n, basis[v]);
      pb.A[v][lo]    = -E;
      pb.A[v][hi]    = E;
    }
    pb.A[var_t][lo] = Matrix::Identity(n, n);
  }

  if (with_p) {
    // -<D, dS> - p >= 0, normalized by its largest coefficient.
    const Index blk = pb.add_block(1, Matrix::Zero(1, 1));
    Vector coef(n_ds);
    for (Index v = 0; v < n_ds; ++v) { coef(v) = tau * D.cwiseProduct(basis_matrix(n, basis[v])).sum(); }
    const Scalar row_scale = 1 / std::max(coef.cwiseAbs().maxCoeff(), pi);
    for (Index v = 0; v < n_ds; ++v) { pb.A[v][blk](0, 0) = coef(v) * row_scale; }
    pb.A[var_p][blk](0, 0) = pi * row_scale;

    const Index p_lo          = pb.add_block(1, Matrix::Zero(1, 1));
    pb.A[var_p][p_lo](0, 0)   = -1;
    const Index p_hi          = pb.add_block(1, Matrix::Constant(1, 1, 1));
    pb.A[var_p][p_hi](0, 0)   = 1;
  }
  const Index t_lo        = pb.add_block(1, Matrix::Constant(1, 1, -params.t_min / tau));
  pb.A[var_t][t_lo](0, 0) = -1;

  const SdpSolution sol = solve_sdp(pb);
  if (sol.status != SdpStatus::optimal || !sol.y.allFinite()) { return res; }

  Matrix dS = Matrix::Zero(n, n);
  for (Index v = 0; v < n_ds; ++v) {
    dS(basis[v].i, basis[v].j) = tau * sol.y(v);
    dS(basis[v].j, basis[v].i) = tau * sol.y(v);
  }

  // Project S + dS onto the eigenvalue band; interior-point iterates sit
  // inside it already, so this only removes rounding.
  Matrix X = S + dS;
  X        = (0.5 * (X + X.transpose())).eval();
  Scalar lam_min;
  if (diagonal) {
    for (Index i = 0; i < n; ++i) { X(i, i) = std::clamp(X(i, i), params.t_min, params.t_max); }
    lam_min = X.diagonal().minCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(X);
    const Vector lam = es.eigenvalues().cwiseMax(params.t_min).cwiseMin(params.t_max);
    X       = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    X       = (0.5 * (X + X.transpose())).eval();
    lam_min = lam(0);
  }
  dS = X - S;

  res.deltaS = dS;
  res.t      = std::clamp(std::min(tau * sol.y(var_t), lam_min), params.t_min, params.t_max);
  const Scalar decrease = -D.cwiseProduct(dS).sum();
  res.p      = with_p ? std::clamp(std::min(pi * sol.y(var_p), decrease), Scalar(0), params.p_max) : 0;
  res.status = SdpResultStatus::optimal;
  if (!sdp_result_consistent(S, sens, params, res)) {
    res.deltaS = Matrix::Zero(n, n);
    res.p      = 0;
    res.t      = params.t_min;
    res.status = SdpResultStatus::numerical_failure;
  }
  return res;
}

bool sdp_result_consistent(const Matrix & S, const ScalingSensitivity & sens, const OfoParams & params, const SdpResult & r,
                           Scalar tol)
{
  const Matrix D = 0.5 * (sens.D + sens.D.transpose());
  if (!r.deltaS.allFinite() || !is_symmetric(r.deltaS, 1e-9)) { return false; }
  const Vector lam = symmetric_eigenvalues(S + r.deltaS);
  if (lam(0) < r.t - tol || lam(lam.size() - 1) > params.t_max + tol) { return false; }
  if (D.cwiseProduct(r.deltaS).sum() > -r.p + tol) { return false; }
  if (r.p < 0 || r.p > params.p_max) { return false; }
  return r.t >= params.t_min && r.t <= params.t_max;
}

Vector adapt_heuristic(const Vector & S_diag, const Vector & D_diag, const OfoParams & params)
{
  Vector out = S_diag;
  for (Index i = 0; i < out.size(); ++i) {
    if (D_diag(i) < 0) {
      out(i) *= 1 + params.beta1;
    } else if (D_diag(i) > 0) {
      out(i) *= 1 - params.beta2;
    }
    out(i) = std::min(params.t_max, std::max(params.t_min, out(i)));
  }
  return out;
}

Vector adapt_ift_analogue(const Vector & S_diag, const Vector & D_diag, const OfoParams & params)
{
  Vector out = S_diag;
  for (Index i = 0; i < out.size(); ++i) {
    const Scalar rate = D_diag(i) / S_diag(i);
    out(i) *= 1 + rate;
    out(i) = std::min(params.t_max, std::max(params.t_min, out(i)));
  }
  return out;
}

}  // namespace ofo
