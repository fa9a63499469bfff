#include "ofo/model.hpp"

#include <string>

namespace ofo {

void ConstraintSet::validate(Index n_u, Index n_y) const
{
  if (A.rows() != b.size()) { throw InvalidModelError("constraint rows of A and b differ"); }
  if (C.rows() != d.size()) { throw InvalidModelError("constraint rows of C and d differ"); }
  if (A.rows() > 0 && A.cols() != n_u) { throw InvalidModelError("A must have n_u columns"); }
  if (C.rows() > 0 && C.cols() != n_y) { throw InvalidModelError("C must have n_y columns"); }
}

ConstraintSet ConstraintSet::boxes(const Vector & u_lo, const Vector & u_hi, const Vector & y_lo, const Vector & y_hi)
{
  const Index nu = u_lo.size(), ny = y_lo.size();
  ConstraintSet cons;
  cons.A = Matrix::Zero(2 * nu, nu);
  cons.b = Vector::Zero(2 * nu);
  for (Index i = 0; i < nu; ++i) {
    cons.A(2 * i, i)     = 1;
    cons.b(2 * i)        = u_hi(i);
    cons.A(2 * i + 1, i) = -1;
    cons.b(2 * i + 1)    = -u_lo(i);
  }
  cons.C = Matrix::Zero(2 * ny, ny);
  cons.d = Vector::Zero(2 * ny);
  for (Index i = 0; i < ny; ++i) {
    cons.C(2 * i, i)     = 1;
    cons.d(2 * i)        = y_hi(i);
    cons.C(2 * i + 1, i) = -1;
    cons.d(2 * i + 1)    = -y_lo(i);
  }
  return cons;
}

std::string_view to_string(AdaptationMode mode)
{
  switch (mode) {
  case AdaptationMode::fixed: return "fixed";
  case AdaptationMode::heuristic_diagonal: return "heuristic-diagonal";
  case AdaptationMode::sdp_full: return "sdp-full";
  case AdaptationMode::sdp_diagonal: return "sdp-diagonal";
  }
  return "unknown";
}

AdaptationMode adaptation_mode_from_string(std::string_view name)
{
  if (name == "fixed") { return AdaptationMode::fixed; }
  if (name == "heuristic-diagonal") { return AdaptationMode::heuristic_diagonal; }
  if (name == "sdp-full") { return AdaptationMode::sdp_full; }
  if (name == "sdp-diagonal") { return AdaptationMode::sdp_diagonal; }
  throw ConfigError("unknown adaptation mode '" + std::string(name) + "'");
}

void OfoParams::validate(Index n_u) const
{
  if (!(alpha_min > 0)) { throw ConfigError("alpha_min must be positive"); }
  if (!(alpha_max >= alpha_min)) { throw ConfigError("alpha_max must be >= alpha_min"); }
  if (!(alpha0 >= alpha_min && alpha0 <= alpha_max)) { throw ConfigError("alpha0 must lie in [alpha_min, alpha_max]"); }
  if (!(p_max > 0)) { throw ConfigError("p_max must be positive"); }
  if (!(t_min > 0)) { throw ConfigError("t_min must be positive"); }
  if (!(t_max >= t_min)) { throw ConfigError("t_max must be >= t_min"); }
  if (!(beta1 > 0 && beta1 < 1)) { throw ConfigError("beta1 must lie in (0, 1)"); }
  if (!(beta2 > 0 && beta2 < 1)) { throw ConfigError("beta2 must lie in (0, 1)"); }
  if (S0.rows() != n_u || S0.cols() != n_u) { throw ConfigError("S0 must be n_u x n_u"); }
  if (!is_symmetric(S0)) { throw ConfigError("S0 must be symmetric"); }
  const Vector eig = symmetric_eigenvalues(S0);
  if (eig(0) < t_min - kEigenTol || eig(eig.size() - 1) > t_max + kEigenTol) {
    throw ConfigError("S0 eigenvalues must lie in [t_min, t_max]");
  }
  if (is_diagonal(mode) && !S0.isDiagonal(0.0)) { throw ConfigError("diagonal adaptation modes need a diagonal S0"); }
}

namespace {

void require_finite(const auto & x, const char * what)
{
  if (!x.allFinite()) { throw InvalidModelError(std::string("non-finite ") + what); }
}

}  // namespace

Vector reduced_gradient(const PlantModel & plant, const Vector & u, const Vector & y, const Matrix & grad_h)
{
  if (u.size() != plant.n_u || y.size() != plant.n_y) {
    throw InvalidModelError("reduced_gradient: u or y has the wrong dimension");
  }
  if (grad_h.rows() != plant.n_y || grad_h.cols() != plant.n_u) {
    throw InvalidModelError("reduced_gradient: sensitivity must be n_y x n_u");
  }
  const RowVector du = plant.grad_u(u, y);
  const RowVector dy = plant.grad_y(u, y);
  if (du.size() != plant.n_u || dy.size() != plant.n_y) {
    throw InvalidModelError("reduced_gradient: objective gradient has the wrong dimension");
  }
  require_finite(du, "objective gradient in u");
  require_finite(dy, "objective gradient in y");
  require_finite(grad_h, "sensitivity");
  return du.transpose() + grad_h.transpose() * dy.transpose();
}

Vector reduced_gradient(const PlantModel & plant, const Vector & u, const Vector & y)
{
  return reduced_gradient(plant, u, y, plant.sensitivity(u, y));
}

bool is_symmetric(const Matrix & S, Scalar tol)
{
  if (S.rows() != S.cols()) { return false; }
  if (S.size() == 0) { return true; }
  return (S - S.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Vector symmetric_eigenvalues(const Matrix & S)
{
  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

bool spd_project_check(const Matrix & S, Scalar t_min)
{
  if (S.rows() != S.cols() || S.rows() == 0) { return false; }
  if (!S.allFinite() || !is_symmetric(S)) { return false; }
  return symmetric_eigenvalues(S)(0) >= t_min;
}

}  // namespace ofo
