#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ofo/plants.hpp"
#include "support/oracles.hpp"

using namespace ofo;

namespace {

Matrix fd_jacobian(const std::function<Vector(const Vector &)> & f, const Vector & u, Scalar rel_step)
{
  const Vector f0 = f(u);
  Matrix J(f0.size(), u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const Scalar h = rel_step * std::max(Scalar(1), std::abs(u(i)));
    Vector up = u, um = u;
    up(i) += h;
    um(i) -= h;
    J.col(i) = (f(up) - f(um)) / (2 * h);
  }
  return J;
}

Scalar rel_err(const Matrix & a, const Matrix & ref) { return (a - ref).norm() / std::max(Scalar(1e-12), ref.norm()); }

Vector random_in_box(std::mt19937 & rng, const ConstraintSet & cons, Index n)
{
  Vector u(n);
  for (Index i = 0; i < n; ++i) {
    const Scalar hi = cons.b(2 * i), lo = -cons.b(2 * i + 1);
    u(i)            = oracle::random_vector(rng, 1, lo, hi)(0);
  }
  return u;
}

Vector v2(Scalar a, Scalar b)
{
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("toy plant values")
{
  auto [plant, cons] = toy_plant();
  const Vector u0    = v2(-0.8, -0.5);
  CHECK(plant.measure(u0)(0) == doctest::Approx(0.075).epsilon(1e-14));
  CHECK(plant.objective(u0, plant.measure(u0)) == doctest::Approx(4.81).epsilon(1e-14));
  const Vector us = v2(-0.5, 1);
  CHECK(plant.objective(us, plant.measure(us)) == doctest::Approx(-1.625).epsilon(1e-14));
  CHECK(cons.A.rows() == 4);
  CHECK(cons.C.rows() == 2);
}

TEST_CASE("Rosenbrock plant values")
{
  auto [plant, cons] = rosenbrock_plant();
  const Vector y = plant.measure(v2(0.86, 0.75));
  CHECK(y(0) == doctest::Approx(0.104).epsilon(1e-10));
  CHECK(y(1) == doctest::Approx(0.14).epsilon(1e-12));
  const Vector u1 = v2(1, 0.75);
  const Vector y1 = plant.measure(u1);
  CHECK(y1(1) == 0);
  CHECK(plant.objective(u1, y1) == doctest::Approx(y1(0) * y1(0)));
  Matrix J0(2, 2);
  J0 << 0, 10, -1, 0;
  CHECK(plant.sensitivity(v2(0, 0), plant.measure(v2(0, 0))) == J0);
  CHECK(-cons.b(3) == -1);
  CHECK(cons.b(2) == 0.75);
}

TEST_CASE("gas-lift surrogate structure")
{
  const GasLiftSurrogate cfg = GasLiftSurrogate::defaults();
  auto [plant, cons]         = gaslift_plant(cfg);
  CHECK(plant.measure(Vector::Zero(5)).isZero(0.0));
  const Vector u0 = GasLiftSurrogate::default_u0();
  CHECK(u0.sum() == 23000);
  CHECK(cons.A.rows() == 11);
  CHECK(cons.A.row(10) == RowVector::Ones(5));
  CHECK(cons.b(10) == 26000);
  CHECK((cons.A * u0 - cons.b).maxCoeff() <= 0);

  const Matrix J = plant.sensitivity(u0, plant.measure(u0));
  for (Index i = 0; i < 5; ++i) {
    CHECK((J(0, i) != 0) == (i < 2));
    CHECK((J(1, i) != 0) == (i >= 2));
  }

  // Each well curve is increasing and concave on the input range.
  for (Index i = 0; i < 5; ++i) {
    const Scalar h = 100;
    for (Scalar u = h; u <= 10000 - h; u += h) {
      CHECK(cfg.well_output(i, u + h) > cfg.well_output(i, u));
      CHECK(cfg.well_output(i, u + h) - 2 * cfg.well_output(i, u) + cfg.well_output(i, u - h) <= 0);
    }
  }
}

TEST_CASE("declared sensitivities match finite differences of the measurement")
{
  std::mt19937 rng(oracle::kSeed);
  for (auto pc : {toy_plant(), rosenbrock_plant(), gaslift_plant(GasLiftSurrogate::defaults())}) {
    PlantModel & plant = pc.first;
    for (int trial = 0; trial < 20; ++trial) {
      const Vector u  = random_in_box(rng, pc.second, plant.n_u);
      const Matrix J  = plant.sensitivity(u, plant.measure(u));
      const Matrix fd = fd_jacobian(plant.measure, u, 1e-6);
      CAPTURE(plant.name);
      CHECK(rel_err(J, fd) <= 1e-4);
    }
  }
}

TEST_CASE("reactor right-hand side and integration")
{
  const CstrParams p;
  const Eigen::Vector2d x0(p.cA0, p.cB0), u0(p.F0, p.cAi0);
  const Eigen::Vector2d d = cstr_rhs(p, x0, u0);
  CHECK(d(0) == doctest::Approx(-0.009).epsilon(0.1));
  CHECK(d(1) == doctest::Approx(-0.004).epsilon(0.1));
  const Eigen::Vector2d x1 = cstr_integrate(p, x0, u0, 1.0);
  CHECK((x1 - x0).cwiseAbs().maxCoeff() < 0.01);

  // Without inflow cA only decays.
  const Eigen::Vector2d dz = cstr_rhs(p, x0, Eigen::Vector2d(0, p.cAi0));
  CHECK(dz(0) == doctest::Approx(-p.k1 * p.cA0 - p.k3 * p.cA0 * p.cA0));
  CHECK(dz(0) < 0);

  const Eigen::Vector2d half = cstr_integrate(p, x0, u0, 1.0, 0.005);
  CHECK((x1 - half).cwiseAbs().maxCoeff() < 1e-8);
  const Eigen::Vector2d far = cstr_integrate(p, x0, Eigen::Vector2d(634, 15), 1.0);
  const Eigen::Vector2d far_half = cstr_integrate(p, x0, Eigen::Vector2d(634, 15), 1.0, 0.005);
  CHECK((far - far_half).cwiseAbs().maxCoeff() < 1e-8);

  // A non-multiple interval lands exactly on dT.
  const Eigen::Vector2d a = cstr_integrate(p, x0, u0, 0.015, 0.01);
  const Eigen::Vector2d b = cstr_integrate(p, cstr_integrate(p, x0, u0, 0.01, 0.01), u0, 0.005, 0.01);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(cstr_integrate(p, x0, u0, 0.0), IntegrationError);
  CHECK_THROWS_AS(cstr_integrate(p, x0, Eigen::Vector2d(1e308, 1e308), 1.0), IntegrationError);
}

TEST_CASE("reactor steady state and sensitivity")
{
  const CstrParams p;
  const Eigen::Vector2d u0(p.F0, p.cAi0);
  const Eigen::Vector2d ss = cstr_steady_state(p, u0);
  CHECK(ss(1) == doctest::Approx(1.0845).epsilon(1e-3));
  CHECK(ss(1) == doctest::Approx(p.k1 * ss(0) / (p.F0 / p.V + p.k2)).epsilon(1e-14));
  CHECK(cstr_rhs(p, ss, u0).cwiseAbs().maxCoeff() <= 1e-12);

  // dG/dy lower-left is k1 regardless of state, so the c_B row picks it up.
  const Eigen::Matrix2d J = cstr_sensitivity(p, u0, ss);
  const Scalar h          = 1e-4;
  const Eigen::Vector2d col0 =
    (cstr_steady_state(p, u0 + Eigen::Vector2d(h, 0)) - cstr_steady_state(p, u0 - Eigen::Vector2d(h, 0))) / (2 * h);
  CHECK((J.col(0) - col0).norm() <= 1e-4 * col0.norm());

  std::mt19937 rng(oracle::kSeed + 2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector2d u(oracle::random_vector(rng, 1, 10, p.F_max)(0), oracle::random_vector(rng, 1, 0.5, p.cAi_max)(0));
    const Eigen::Matrix2d Ju = cstr_sensitivity(p, u, cstr_steady_state(p, u));
    const Matrix fd = fd_jacobian([&](const Vector & v) -> Vector { return cstr_steady_state(p, v.head<2>()); }, u, 1e-6);
    CAPTURE(trial);
    CHECK(rel_err(Ju, fd) <= 1e-4);
  }
}

TEST_CASE("reference trajectory lookup")
{
  const Reference r{{{0, 1.0}, {10, 1.3}, {25, 0.8}}};
  CHECK(r(0) == 1.0);
  CHECK(r(9.99) == 1.0);
  CHECK(r(10) == 1.3);
  CHECK(r(24) == 1.3);
  CHECK(r(100) == 0.8);
  CHECK_THROWS_AS(Reference{}(0), ConfigError);
}

TEST_CASE("reactor plant tracks time and stays nonnegative")
{
  const CstrParams p;
  auto sim           = std::make_shared<CstrSimulator>(p, Reference{{{0, 1.0}, {3, 1.3}}});
  auto [plant, cons] = cstr_plant(sim);
  CHECK(plant.initial_output(Vector::Zero(2)) == Vector(Eigen::Vector2d(p.cA0, p.cB0)));

  // At r = c_B the objective and its c_B gradient vanish.
  Vector y = Eigen::Vector2d(2.0, 1.0);
  CHECK(plant.objective(Vector::Zero(2), y) == 0);
  CHECK(plant.grad_y(Vector::Zero(2), y)(1) == 0);

  std::mt19937 rng(oracle::kSeed + 9);
  for (int k = 1; k <= 30; ++k) {
    const Vector u = random_in_box(rng, cons, 2);
    y              = plant.measure(u);
    CHECK(sim->time() == doctest::Approx(k));
    CHECK((y.array() >= 0).all());
    CHECK(plant.objective(u, y) >= 0);
  }
  CHECK(sim->setpoint() == 1.3);

  CstrParams bad = p;
  bad.V          = -1;
  CHECK_THROWS_AS(CstrSimulator(bad, Reference{{{0, 1.0}}}), ConfigError);
}
