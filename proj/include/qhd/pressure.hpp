#pragma once

#include <memory>
#include <string_view>

#include "qhd/field.hpp"
#include "qhd/grid.hpp"

namespace qhd {

enum class PressureSolverKind { Auto, Spectral, RedBlackSor };

std::string_view to_string(PressureSolverKind kind) noexcept;
PressureSolverKind parse_pressure_solver_kind(std::string_view text);

struct SorOptions {
  double omega = 1.9;
  double tolerance = 1e-7;  // L-inf residual relative to max(1, |rhs|_inf)
  int max_iterations = 50000;
  int check_every = 10;
};

/// Five-point Laplacian with mirror ghosts (homogeneous Neumann) on walls, step
/// and inlet, and the pressure reference p = 0 on the outlet plane x = L, one
/// grid step beyond the last node column.
///
/// Solvers find p with L p = rhs on every active node.
class PressureSolver {
 public:
  virtual ~PressureSolver() = default;

  /// p carries the warm start on entry.
  virtual void solve(const Field2D& rhs, Field2D& p) = 0;
  virtual std::string_view name() const noexcept = 0;

  int last_iterations() const noexcept { return last_iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 protected:
  int last_iterations_ = 0;
  double last_residual_ = 0.0;
};

/// Direct solver for rectangular domains: cosine transform across the channel,
/// tridiagonal sweeps along it.
std::unique_ptr<PressureSolver> make_spectral_solver(const UniformGrid& grid);

/// Red-black successive over-relaxation; works on any step geometry.
std::unique_ptr<PressureSolver> make_sor_solver(const UniformGrid& grid, SorOptions options = {});

/// Auto picks the spectral solver when the grid is rectangular, SOR otherwise.
std::unique_ptr<PressureSolver> make_pressure_solver(const UniformGrid& grid,
                                                     PressureSolverKind kind,
                                                     SorOptions options = {});

/// The solver's Laplacian at one active node.
double laplacian_at(const UniformGrid& grid, const Field2D& p, int i, int j) noexcept;

/// Applies the solver's Laplacian at every active node (zero elsewhere).
void apply_laplacian(const UniformGrid& grid, const Field2D& p, Field2D& out);

/// max |L p - rhs| over the nodes where the equation is imposed.
double laplacian_residual(const UniformGrid& grid, const Field2D& rhs, const Field2D& p);

}  // namespace qhd
