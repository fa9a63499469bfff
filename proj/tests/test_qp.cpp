#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ofo/plants.hpp"
#include "ofo/qp.hpp"
#include "support/oracles.hpp"

using namespace ofo;

namespace {

QpData random_box_qp(std::mt19937 & rng, Index n, bool with_general_rows)
{
  QpData qp;
  qp.P = metric_inverse(oracle::random_spd(rng, n, 0.1, 5.0));
  qp.q = oracle::random_vector(rng, n, -3, 3);
  const Vector lo = oracle::random_vector(rng, n, -1.5, -0.05);
  const Vector hi = oracle::random_vector(rng, n, 0.05, 1.5);
  const Index extra = with_general_rows ? 2 : 0;
  qp.G = Matrix::Zero(2 * n + extra, n);
  qp.h = Vector::Zero(2 * n + extra);
  for (Index i = 0; i < n; ++i) {
    qp.G(2 * i, i)     = 1;
    qp.h(2 * i)        = hi(i);
    qp.G(2 * i + 1, i) = -1;
    qp.h(2 * i + 1)    = -lo(i);
  }
  for (Index r = 0; r < extra; ++r) {
    qp.G.row(2 * n + r) = oracle::random_vector(rng, n, -1, 1).transpose();
    qp.h(2 * n + r)     = oracle::random_vector(rng, 1, 0.05, 1)(0);
  }
  qp.n_input_rows = qp.G.rows();
  return qp;
}

}  // namespace

TEST_CASE("metric inverse")
{
  CHECK(metric_inverse(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  Matrix S(2, 2);
  S << 1000, 0, 0, 0.25;
  const Matrix P = metric_inverse(S);
  CHECK(P(0, 0) == doctest::Approx(0.001));
  CHECK(P(1, 1) == doctest::Approx(4.0));
  CHECK(std::abs(P(0, 1)) < 1e-15);

  Matrix sing(2, 2);
  sing << 1, 0, 0, 1e-13;
  CHECK_THROWS_AS(metric_inverse(sing), IllConditionedMetricError);
}

TEST_CASE("toy assembly at the starting point")
{
  auto [plant, cons] = toy_plant();
  Vector u(2);
  u << -0.8, -0.5;
  const Vector y      = plant.measure(u);
  const Matrix grad_h = plant.sensitivity(u, y);
  const Vector g      = reduced_gradient(plant, u, y, grad_h);
  const QpData qp     = assemble_qp(Matrix::Identity(2, 2), u, y, g, grad_h, cons, 0.01);
  CHECK(qp.P.isApprox(Matrix::Identity(2, 2)));
  CHECK(qp.G.rows() == 6);
  CHECK(qp.n_input_rows == 4);
  CHECK(qp.h(0) == doctest::Approx(1.8));
  CHECK(qp.h(1) == doctest::Approx(0.2));
  CHECK(qp.G(0, 0) == doctest::Approx(0.01));
  // y <= 1 row: 0.01 * grad_h
  CHECK(qp.G(4, 1) == doctest::Approx(-0.0025));
  CHECK(qp.h(4) == doctest::Approx(0.925));
  CHECK(qp.h(5) == doctest::Approx(0.075));

  const QpSolution sol = solve_w(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.w(0) == doctest::Approx(1.9).epsilon(1e-12));
  CHECK(sol.w(1) == doctest::Approx(5.8).epsilon(1e-12));
  CHECK(sol.active.empty());
  CHECK(sol.kkt_residual <= 1e-8);

  // Same data through the state overload.
  ControllerState st;
  st.u = u;
  st.y = y;
  st.S = Matrix::Identity(2, 2);
  const QpData qp2 = assemble_qp(st, plant, cons, 0.01);
  CHECK(qp2.h.isApprox(qp.h));
  CHECK(qp2.G.isApprox(qp.G));
}

TEST_CASE("active upper bound projects the step")
{
  QpData qp;
  qp.P = Matrix::Identity(2, 2);
  qp.q = Vector(2);
  qp.q << -3, 1;
  qp.G = Matrix::Zero(1, 2);
  qp.G(0, 0)      = 0.5;  // alpha_max * (u1 <= 1) at u1 = 1
  qp.h            = Vector::Zero(1);
  qp.n_input_rows = 1;
  const QpSolution sol = solve_w(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(0.5 * sol.w(0) <= 1e-12);
  CHECK(std::abs(sol.w(0)) < 1e-12);
  CHECK(sol.w(1) == doctest::Approx(-1));
  REQUIRE(sol.active.size() == 1);
  CHECK(sol.duals(0) == doctest::Approx(6));
}

TEST_CASE("infeasible polytope is reported")
{
  QpData qp;
  qp.P = Matrix::Identity(1, 1);
  qp.q = Vector::Zero(1);
  qp.G = Matrix(2, 1);
  qp.G << 1, -1;
  qp.h = Vector(2);
  qp.h << -1, -1;  // w <= -1 and w >= 1
  qp.n_input_rows = 2;
  CHECK(solve_w(qp).status == QpStatus::infeasible);
}

TEST_CASE("solver agrees with active-set enumeration on random instances")
{
  std::mt19937 rng(oracle::kSeed);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n   = 2 + trial % 2;
    const QpData qp = random_box_qp(rng, n, trial % 3 == 0);
    bool found      = false;
    const Vector ref = oracle::enumerate_qp(qp, &found);
    const QpSolution sol = solve_w(qp);
    CAPTURE(trial);
    REQUIRE(found);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK((sol.w - ref).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(((qp.G * sol.w - qp.h).array() <= 1e-7).all());
    CHECK((sol.duals.array() >= -1e-8).all());
    CHECK((sol.duals.cwiseProduct(qp.G * sol.w - qp.h)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(sol.kkt_residual <= 1e-8);
    ++compared;
  }
  CHECK(compared == 200);
}

TEST_CASE("unconstrained solution is -S g and scales with the metric")
{
  std::mt19937 rng(oracle::kSeed + 1);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n  = 2 + trial % 4;
    const Matrix S = oracle::random_spd(rng, n, 0.2, 3.0);
    const Vector g = oracle::random_vector(rng, n, -1, 1);
    QpData qp;
    qp.P = metric_inverse(S);
    qp.q = g;
    qp.G = Matrix::Zero(0, n);
    qp.h = Vector::Zero(0);
    const QpSolution sol = solve_w(qp);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK((sol.w + S * g).cwiseAbs().maxCoeff() <= 1e-8);

    qp.P                  = metric_inverse(2.5 * S);
    const QpSolution sol2 = solve_w(qp);
    CHECK((sol2.w - 2.5 * sol.w).cwiseAbs().maxCoeff() <= 1e-8);
  }
}
