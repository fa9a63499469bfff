#include "ofo/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ofo {

Matrix metric_inverse(const Matrix & S)
{
  if (S.rows() != S.cols() || S.rows() == 0) { throw IllConditionedMetricError("metric must be square"); }
  if (!S.allFinite()) { throw IllConditionedMetricError("metric has non-finite entries"); }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
  const Vector & lam = es.eigenvalues();
  if (!(lam(0) > 0) || lam(lam.size() - 1) > kMaxMetricCondition * lam(0)) {
    throw IllConditionedMetricError("metric is singular or has condition number above 1e12");
  }
  const Matrix & V = es.eigenvectors();
  Matrix P = V * lam.cwiseInverse().asDiagonal() * V.transpose();
  return 0.5 * (P + P.transpose());
}

QpData assemble_qp(
  const Matrix & S,
  const Vector & u,
  const Vector & y,
  const Vector & reduced_grad,
  const Matrix & grad_h,
  const ConstraintSet & cons,
  Scalar alpha_max)
{
  const Index n = u.size();
  const Index m1 = cons.A.rows(), m2 = cons.C.rows();

  QpData qp;
  qp.P = metric_inverse(S);
  qp.q = reduced_grad;
  qp.G.resize(m1 + m2, n);
  qp.h.resize(m1 + m2);
  if (m1 > 0) {
    qp.G.topRows(m1) = alpha_max * cons.A;
    qp.h.head(m1)    = cons.b - cons.A * u;
  }
  if (m2 > 0) {
    qp.G.bottomRows(m2) = alpha_max * cons.C * grad_h;
    qp.h.tail(m2)       = cons.d - cons.C * y;
  }
  qp.n_input_rows = m1;
  return qp;
}

QpData assemble_qp(const ControllerState & state, const PlantModel & plant, const ConstraintSet & cons, Scalar alpha_max)
{
  const Matrix grad_h = plant.sensitivity(state.u, state.y);
  const Vector g      = reduced_gradient(plant, state.u, state.y, grad_h);
  return assemble_qp(state.S, state.u, state.y, g, grad_h, cons, alpha_max);
}

Scalar kkt_residual(const QpData & qp, const Vector & w, const Vector & duals)
{
  const Vector Pw  = qp.P * w;
  const Vector Gtl = qp.G.transpose() * duals;
  const Scalar stat_scale =
    std::max({Scalar(1), Pw.lpNorm<Eigen::Infinity>(), qp.q.lpNorm<Eigen::Infinity>(), Gtl.lpNorm<Eigen::Infinity>()});
  Scalar res = (Pw + qp.q + Gtl).lpNorm<Eigen::Infinity>() / stat_scale;

  const Vector slack = qp.h - qp.G * w;
  for (Index i = 0; i < slack.size(); ++i) {
    const Scalar row_scale = 1 + std::abs(qp.h(i)) + qp.G.row(i).cwiseAbs().dot(w.cwiseAbs());
    res = std::max(res, std::max(Scalar(0), -slack(i)) / row_scale);
    res = std::max(res, std::max(Scalar(0), -duals(i)) / stat_scale);
    res = std::max(res, std::abs(duals(i) * slack(i)) / (stat_scale * row_scale));
  }
  return res;
}

namespace {

// Working set of the dual method, kept as normals in the >= form n_j' w >= b_j
// (n_j = -G_j', b_j = -h_j) together with a QR factorization of L^{-1} N.
class WorkingSet
{
public:
  WorkingSet(const QpData & qp, const Eigen::LLT<Matrix> & llt) : qp_(qp), llt_(llt) {}

  const std::vector<Index> & indices() const { return idx_; }
  Vector & multipliers() { return u_; }
  Index size() const { return static_cast<Index>(idx_.size()); }

  void add(Index row, Scalar multiplier)
  {
    idx_.push_back(row);
    u_.conservativeResize(u_.size() + 1);
    u_(u_.size() - 1) = multiplier;
    refactor();
  }

  void drop(Index pos)
  {
    idx_.erase(idx_.begin() + pos);
    const Index q = u_.size();
    Vector nu(q - 1);
    nu << u_.head(pos), u_.tail(q - 1 - pos);
    u_ = nu;
    refactor();
  }

  /// Primal direction z and dual direction r for a constraint normal n_plus.
  /// Returns ||Q2' d|| / ||d||, the part of n_plus not spanned by the working set.
  Scalar directions(const Vector & n_plus, Vector & z, Vector & r) const
  {
    const Vector d = llt_.matrixL().solve(n_plus);
    Vector d2 = d;
    r.resize(size());
    if (size() > 0) {
      const Vector c = q1_.transpose() * d;
      d2 -= q1_ * c;
      r = r_.triangularView<Eigen::Upper>().solve(c);
    }
    z = llt_.matrixU().solve(d2);
    return d2.norm() / std::max(d.norm(), std::numeric_limits<Scalar>::min());
  }

private:
  void refactor()
  {
    const Index n = qp_.P.rows();
    const Index q = size();
    if (q == 0) {
      q1_.resize(n, 0);
      r_.resize(0, 0);
      return;
    }
    Matrix N(n, q);
    for (Index j = 0; j < q; ++j) { N.col(j) = -qp_.G.row(idx_[j]).transpose(); }
    const Matrix M = llt_.matrixL().solve(N);
    Eigen::HouseholderQR<Matrix> qr(M);
    q1_ = qr.householderQ() * Matrix::Identity(n, q);
    r_  = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  }

  const QpData & qp_;
  const Eigen::LLT<Matrix> & llt_;
  std::vector<Index> idx_;
  Vector u_;
  Matrix q1_;
  Matrix r_;
};

// Solves the equality-constrained KKT system for a fixed working set.
bool polish(const QpData & qp, const std::vector<Index> & working, Vector & w, Vector & lambda)
{
  const Index n = qp.P.rows();
  const Index q = static_cast<Index>(working.size());
  Matrix K = Matrix::Zero(n + q, n + q);
  Vector rhs(n + q);
  K.topLeftCorner(n, n) = qp.P;
  rhs.head(n)           = -qp.q;
  for (Index j = 0; j < q; ++j) {
    K.block(0, n + j, n, 1) = qp.G.row(working[j]).transpose();
    K.block(n + j, 0, 1, n) = qp.G.row(working[j]);
    rhs(n + j)              = qp.h(working[j]);
  }
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) { return false; }
  const Vector sol = lu.solve(rhs);
  if (!sol.allFinite()) { return false; }
  w      = sol.head(n);
  lambda = sol.tail(q);
  return true;
}

}  // namespace

QpSolution solve_w(const QpData & qp, Scalar tol)
{
  const Index n = qp.P.rows();
  const Index m = qp.G.rows();
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();

  QpSolution sol;
  sol.duals = Vector::Zero(m);

  Eigen::LLT<Matrix> llt(qp.P);
  if (llt.info() != Eigen::Success) {
    sol.w      = Vector::Zero(n);
    sol.status = QpStatus::numerical_failure;
    return sol;
  }

  Vector w = -llt.solve(qp.q);
  WorkingSet ws(qp, llt);

  const auto violation_tol = [&](Index j) {
    return 1e-12 * (1 + std::abs(qp.h(j)) + qp.G.row(j).cwiseAbs().dot(w.cwiseAbs()));
  };
  const auto in_working = [&](Index j) {
    return std::find(ws.indices().begin(), ws.indices().end(), j) != ws.indices().end();
  };

  const int max_iter = static_cast<int>(10 * (n + m) + 50);
  int iter           = 0;
  bool infeasible    = false;
  bool done          = false;

  while (!done && !infeasible && iter < max_iter) {
    // Most violated constraint outside the working set.
    Index p       = -1;
    Scalar worst  = 0;
    const Vector s = qp.h - qp.G * w;
    for (Index j = 0; j < m; ++j) {
      if (in_working(j)) { continue; }
      if (s(j) < -violation_tol(j) && s(j) / (1 + qp.G.row(j).norm()) < worst) {
        worst = s(j) / (1 + qp.G.row(j).norm());
        p     = j;
      }
    }
    if (p < 0) {
      done = true;
      break;
    }

    const Vector n_plus = -qp.G.row(p).transpose();
    Scalar u_plus       = 0;

    while (iter < max_iter) {
      ++iter;
      Vector z, r;
      const Scalar independence = ws.directions(n_plus, z, r);

      Scalar t1 = inf;
      Index drop = -1;
      for (Index j = 0; j < ws.size(); ++j) {
        if (r(j) > 0) {
          const Scalar ratio = ws.multipliers()(j) / r(j);
          if (ratio < t1) {
            t1   = ratio;
            drop = j;
          }
        }
      }

      const Scalar zn  = z.dot(n_plus);
      const Scalar s_p = qp.h(p) - qp.G.row(p).dot(w);
      const Scalar t2  = (independence <= 1e-10 || zn <= 0) ? inf : -s_p / zn;

      if (t1 == inf && t2 == inf) {
        infeasible = true;
        break;
      }
      if (t2 == inf) {
        ws.multipliers() -= t1 * r;
        u_plus += t1;
        ws.drop(drop);
        continue;
      }
      const Scalar t = std::min(t1, t2);
      w += t * z;
      if (ws.size() > 0) { ws.multipliers() -= t * r; }
      u_plus += t;
      if (t2 <= t1) {
        ws.add(p, u_plus);
        break;
      }
      ws.drop(drop);
    }
  }

  sol.iterations = iter;
  if (infeasible) {
    sol.w      = w;
    sol.status = QpStatus::infeasible;
    return sol;
  }
  if (!done) {
    sol.w      = w;
    sol.status = QpStatus::numerical_failure;
    return sol;
  }

  Vector duals = Vector::Zero(m);
  for (Index j = 0; j < ws.size(); ++j) { duals(ws.indices()[j]) = std::max(Scalar(0), ws.multipliers()(j)); }
  Scalar res = kkt_residual(qp, w, duals);

  Vector w_pol, lam_pol;
  if (ws.size() > 0 && polish(qp, ws.indices(), w_pol, lam_pol)) {
    Vector duals_pol = Vector::Zero(m);
    for (Index j = 0; j < ws.size(); ++j) { duals_pol(ws.indices()[j]) = lam_pol(j); }
    const Scalar res_pol = kkt_residual(qp, w_pol, duals_pol);
    if (res_pol < res) {
      w     = w_pol;
      duals = duals_pol;
      res   = res_pol;
    }
  }

  sol.w            = w;
  sol.duals        = duals;
  sol.kkt_residual = res;
  const Vector slack = qp.h - qp.G * w;
  for (Index j = 0; j < m; ++j) {
    if (std::abs(slack(j)) <= kActiveTol) { sol.active.push_back(j); }
  }
  sol.status = res <= tol ? QpStatus::optimal : QpStatus::numerical_failure;
  return sol;
}

}  // namespace ofo
