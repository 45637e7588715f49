#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qhd/errors.hpp"
#include "qhd/pressure.hpp"
#include "qhd/solver.hpp"
#include "support.hpp"

using namespace qhd;
using qhd::test::max_abs_diff;
using qhd::test::plain_channel;

namespace {

// p = cos(pi x / (2 Lx)) cos(pi y / Ly): zero slope on the inlet plane and both
// walls, zero on the outlet reference plane x = Lx.
double manufactured_error(double h, PressureSolverKind kind) {
  const auto grid = build_grid(plain_channel(2.0), h);
  const double lx = 2.0, ly = grid.y(grid.ny() - 1);
  const double kx = std::numbers::pi / (2 * lx), ky = std::numbers::pi / ly;
  Field2D exact(grid.nx(), grid.ny()), rhs(grid.nx(), grid.ny()), p(grid.nx(), grid.ny());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      exact(i, j) = std::cos(kx * grid.x(i)) * std::cos(ky * grid.y(j));
      rhs(i, j) = -(kx * kx + ky * ky) * exact(i, j);
    }
  SorOptions opt;
  opt.tolerance = 1e-12;
  opt.max_iterations = 200000;
  auto solver = make_pressure_solver(grid, kind, opt);
  solver->solve(rhs, p);
  return max_abs_diff(p, exact);
}

}  // namespace

TEST_CASE("manufactured pressure converges at second order") {
  for (auto kind : {PressureSolverKind::Spectral, PressureSolverKind::RedBlackSor}) {
    CAPTURE(to_string(kind));
    const double e1 = manufactured_error(1.0 / 16, kind);
    const double e2 = manufactured_error(1.0 / 32, kind);
    const double ratio = e1 / e2;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("pure x-compression gives the quadratic pressure") {
  // u* = (-x, 0) has div u* = -1; with a = 0 and prev_p at the fixed point the
  // constraint reads tau lap p = -1, solved by p = (Lx^2 - x^2) / 2.
  const auto grid = build_grid(plain_channel(2.0), 1.0 / 16);
  SolverParams par;
  par.re = 100;
  par.tau = 1.0;
  par.dt = 1e-3;
  QhdSolver solver(grid, par);
  VectorField us(grid.nx(), grid.ny()), a(grid.nx(), grid.ny());
  Field2D exact(grid.nx(), grid.ny());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      us.x(i, j) = -grid.x(i);
      exact(i, j) = 0.5 * (4.0 - grid.x(i) * grid.x(i));
    }
  const Field2D p = solver.pressure_solve(us, a, exact);
  CHECK(max_abs_diff(p, exact) < 1e-10);
}

TEST_CASE("divergence-free predictor with no advection leaves the reference pressure") {
  const auto grid = build_grid(plain_channel(2.0), 1.0 / 16);
  SolverParams par;
  par.re = 100;
  par.tau = 0.05;
  QhdSolver solver(grid, par);
  VectorField us(grid.nx(), grid.ny(), 1.0, 0.0), a(grid.nx(), grid.ny());
  const Field2D p = solver.pressure_solve(us, a, Field2D(grid.nx(), grid.ny()));
  CHECK(max_abs_diff(p, Field2D(grid.nx(), grid.ny())) < 1e-12);
}

TEST_CASE("spectral and SOR solvers agree on the step channel") {
  const auto grid = build_grid(StepGeometry{1.0, 0.5, 2.0, 0.0}, 1.0 / 20);
  std::mt19937_64 rng(7);
  const Field2D rhs = qhd::test::random_field(grid.nx(), grid.ny(), rng);
  SorOptions opt;
  opt.tolerance = 1e-11;
  opt.max_iterations = 400000;
  Field2D ps(grid.nx(), grid.ny()), pr(grid.nx(), grid.ny());
  make_spectral_solver(grid)->solve(rhs, ps);
  make_sor_solver(grid, opt)->solve(rhs, pr);
  CHECK(laplacian_residual(grid, rhs, ps) < 1e-9);
  CHECK(max_abs_diff(ps, pr) < 1e-7);
}

TEST_CASE("SOR handles a step placed downstream of the inlet") {
  const auto grid = build_grid(StepGeometry{1.0, 0.5, 3.0, 1.0}, 1.0 / 20);
  CHECK_THROWS_AS(make_spectral_solver(grid), ConfigError);
  auto solver = make_pressure_solver(grid, PressureSolverKind::Auto);
  CHECK(solver->name() == "sor");
  std::mt19937_64 rng(3);
  const Field2D rhs = qhd::test::random_field(grid.nx(), grid.ny(), rng);
  Field2D p(grid.nx(), grid.ny());
  solver->solve(rhs, p);
  CHECK(solver->last_residual() <= 1e-7 * 1.0);
  CHECK(laplacian_residual(grid, rhs, p) < 1e-6);
}

TEST_CASE("SOR reports non-convergence with its residual") {
  const auto grid = build_grid(plain_channel(2.0), 1.0 / 16);
  SorOptions opt;
  opt.max_iterations = 5;
  opt.check_every = 1;
  auto solver = make_sor_solver(grid, opt);
  Field2D rhs(grid.nx(), grid.ny(), 1.0), p(grid.nx(), grid.ny());
  try {
    solver->solve(rhs, p);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.residual() > 1e-7);
  }
}

TEST_CASE("solver kind names round-trip") {
  for (auto k : {PressureSolverKind::Auto, PressureSolverKind::Spectral, PressureSolverKind::RedBlackSor})
    CHECK(parse_pressure_solver_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_pressure_solver_kind("multigrid"), ConfigError);
}
