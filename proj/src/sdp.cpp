#include "ofo/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ofo {

Index SdpProblem::add_block(Index size, Matrix c)
{
  block_sizes.push_back(size);
  C.push_back(std::move(c));
  for (auto & Ai : A) { Ai.push_back(Matrix::Zero(size, size)); }
  return n_blocks() - 1;
}

namespace {

using Blocks = std::vector<Matrix>;

Scalar inner(const Blocks & a, const Blocks & b)
{
  Scalar s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) { s += a[k].cwiseProduct(b[k]).sum(); }
  return s;
}

Scalar frobenius(const Blocks & a) { return std::sqrt(inner(a, a)); }

Blocks scaled_identity(const SdpProblem & pb, Scalar v)
{
  Blocks out;
  for (Index s : pb.block_sizes) { out.push_back(v * Matrix::Identity(s, s)); }
  return out;
}

// A(K)_i = <A_i, K>
Vector apply_A(const SdpProblem & pb, const Blocks & K)
{
  Vector out(pb.n_vars());
  for (Index i = 0; i < pb.n_vars(); ++i) { out(i) = inner(pb.A[static_cast<std::size_t>(i)], K); }
  return out;
}

// A*(y) = sum_i y_i A_i
Blocks apply_At(const SdpProblem & pb, const Vector & y)
{
  Blocks out = scaled_identity(pb, 0);
  for (Index i = 0; i < pb.n_vars(); ++i) {
    for (Index k = 0; k < pb.n_blocks(); ++k) { out[k] += y(i) * pb.A[i][k]; }
  }
  return out;
}

Matrix sym(const Matrix & m) { return 0.5 * (m + m.transpose()); }

// Largest step a in (0, inf] keeping X + a dX positive semidefinite.
Scalar max_step(const Blocks & X, const Blocks & dX)
{
  Scalar a = std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 0; k < X.size(); ++k) {
    Scalar lam_min;
    if (X[k].rows() == 1) {
      lam_min = dX[k](0, 0) / X[k](0, 0);
    } else {
      Eigen::LLT<Matrix> llt(X[k]);
      if (llt.info() != Eigen::Success) { return 0; }
      const Matrix Li = llt.matrixL().solve(Matrix::Identity(X[k].rows(), X[k].cols()));
      Eigen::SelfAdjointEigenSolver<Matrix> es(sym(Li * dX[k] * Li.transpose()), Eigen::EigenvaluesOnly);
      lam_min = es.eigenvalues()(0);
    }
    if (lam_min < 0) { a = std::min(a, -1 / lam_min); }
  }
  return a;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem & pb, const SdpSettings & settings)
{
  const Index m = pb.n_vars();
  const Index nb = pb.n_blocks();
  Index dim = 0;
  for (Index s : pb.block_sizes) { dim += s; }

  SdpSolution sol;
  sol.y = Vector::Zero(m);
  if (dim == 0 || static_cast<Index>(pb.A.size()) != m) { return sol; }

  Scalar max_a = 0, max_rhs = 0;
  for (Index i = 0; i < m; ++i) {
    const Scalar na = frobenius(pb.A[i]);
    max_a           = std::max(max_a, na);
    max_rhs         = std::max(max_rhs, (1 + std::abs(pb.b(i))) / (1 + na));
  }
  const Scalar norm_c = frobenius(pb.C);
  const Scalar norm_b = pb.b.lpNorm<Eigen::Infinity>();
  const Scalar root_n = std::sqrt(static_cast<Scalar>(dim));
  const Scalar xi     = std::max({Scalar(10), root_n, root_n * max_rhs});
  const Scalar eta    = std::max({Scalar(10), root_n, max_a, norm_c});

  Blocks X = scaled_identity(pb, xi);
  Blocks Z = scaled_identity(pb, eta);
  Vector y = Vector::Zero(m);

  const auto direction = [&](const Blocks & Zinv, const Eigen::LDLT<Matrix> & ldlt, const Vector & Rp, const Blocks & Rd,
                             Scalar sigma_mu, const Blocks * corr, Vector & dy, Blocks & dX, Blocks & dZ) {
    // dX = sigma_mu Z^-1 - X - X dZ Z^-1 - corr, dZ = Rd - A*(dy)
    Blocks base(nb);
    for (Index k = 0; k < nb; ++k) {
      base[k] = sigma_mu * Zinv[k] - X[k] - X[k] * Rd[k] * Zinv[k];
      if (corr != nullptr) { base[k] -= (*corr)[k]; }
    }
    dy              = ldlt.solve(Rp - apply_A(pb, base));
    const Blocks At = apply_At(pb, dy);
    dX.resize(nb);
    dZ.resize(nb);
    for (Index k = 0; k < nb; ++k) {
      dZ[k] = Rd[k] - At[k];
      dX[k] = sym(base[k] + X[k] * At[k] * Zinv[k]);
    }
  };

  for (int it = 0; it < settings.max_iter; ++it) {
    sol.iterations = it;
    const Vector Rp = pb.b - apply_A(pb, X);
    Blocks Rd       = apply_At(pb, y);
    for (Index k = 0; k < nb; ++k) { Rd[k] = pb.C[k] - Z[k] - Rd[k]; }

    const Scalar pobj = inner(pb.C, X);
    const Scalar dobj = pb.b.dot(y);
    const Scalar mu   = inner(X, Z) / static_cast<Scalar>(dim);
    const Scalar rel_p   = Rp.lpNorm<Eigen::Infinity>() / (1 + norm_b);
    const Scalar rel_d   = frobenius(Rd) / (1 + norm_c);
    const Scalar rel_gap = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));
    const Scalar rel_mu  = inner(X, Z) / (1 + std::abs(pobj) + std::abs(dobj));

    if (rel_p <= settings.tol && rel_d <= settings.tol && rel_gap <= settings.tol && rel_mu <= settings.tol) {
      sol.status = SdpStatus::optimal;
      break;
    }
    if (!std::isfinite(pobj) || !std::isfinite(dobj) || y.lpNorm<Eigen::Infinity>() > 1e14 || frobenius(X) > 1e14) {
      sol.status = SdpStatus::numerical_failure;
      break;
    }

    Blocks Zinv(nb);
    bool z_definite = true;
    for (Index k = 0; k < nb && z_definite; ++k) {
      Eigen::LLT<Matrix> llt(Z[k]);
      z_definite = llt.info() == Eigen::Success;
      if (z_definite) { Zinv[k] = sym(llt.solve(Matrix::Identity(Z[k].rows(), Z[k].cols()))); }
    }
    if (!z_definite) {
      sol.status = SdpStatus::numerical_failure;
      break;
    }

    // Schur complement M_ij = <A_i, X A_j Z^-1>
    Matrix M(m, m);
    for (Index j = 0; j < m; ++j) {
      Blocks T(nb);
      for (Index k = 0; k < nb; ++k) { T[k] = X[k] * pb.A[j][k] * Zinv[k]; }
      for (Index i = 0; i < m; ++i) {
        Scalar s = 0;
        for (Index k = 0; k < nb; ++k) { s += pb.A[i][k].cwiseProduct(T[k].transpose()).sum(); }
        M(i, j) = s;
      }
    }
    Eigen::LDLT<Matrix> ldlt(sym(M));
    if (ldlt.info() != Eigen::Success) {
      sol.status = SdpStatus::numerical_failure;
      break;
    }

    // Predictor
    Vector dy;
    Blocks dX, dZ;
    direction(Zinv, ldlt, Rp, Rd, 0, nullptr, dy, dX, dZ);
    const Scalar ap_aff = std::min(Scalar(1), max_step(X, dX));
    const Scalar ad_aff = std::min(Scalar(1), max_step(Z, dZ));
    Blocks Xa(nb), Za(nb);
    for (Index k = 0; k < nb; ++k) {
      Xa[k] = X[k] + ap_aff * dX[k];
      Za[k] = Z[k] + ad_aff * dZ[k];
    }
    const Scalar mu_aff = inner(Xa, Za) / static_cast<Scalar>(dim);
    const Scalar sigma  = std::clamp(std::pow(mu_aff / mu, 3), Scalar(0), Scalar(1));

    // Corrector
    Blocks corr(nb);
    for (Index k = 0; k < nb; ++k) { corr[k] = dX[k] * dZ[k] * Zinv[k]; }
    direction(Zinv, ldlt, Rp, Rd, sigma * mu, &corr, dy, dX, dZ);
    if (!dy.allFinite()) {
      sol.status = SdpStatus::numerical_failure;
      break;
    }

    const Scalar ap = std::min(Scalar(1), settings.step_fraction * max_step(X, dX));
    const Scalar ad = std::min(Scalar(1), settings.step_fraction * max_step(Z, dZ));
    for (Index k = 0; k < nb; ++k) {
      X[k] = sym(X[k] + ap * dX[k]);
      Z[k] = sym(Z[k] + ad * dZ[k]);
    }
    y += ad * dy;
    sol.iterations = it + 1;
  }

  sol.y                = y;
  sol.X                = X;
  sol.Z                = Z;
  sol.primal_objective = inner(pb.C, X);
  sol.dual_objective   = pb.b.dot(y);
  return sol;
}

}  // namespace ofo
