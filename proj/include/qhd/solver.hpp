#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qhd/field.hpp"
#include "qhd/grid.hpp"
#include "qhd/pressure.hpp"

namespace qhd {

enum class InletProfile { Flat, Parabolic };
enum class GuardPolicy { Warn, Strict };

std::string_view to_string(InletProfile p) noexcept;
InletProfile parse_inlet_profile(std::string_view text);

/// Physical and numerical parameters of the QHD time integrator.
///
/// Everything is dimensionless in channel-height / inlet-velocity units. The
/// Reynolds number is based on the step height, so the kinematic viscosity is
/// (h/H) / Re; for a plain channel (h = 0) the channel height is used instead.
struct SolverParams {
  double re = 4667.0;
  double tau = 0.05;
  double dt = 1e-4;
  /// Blend between central (0) and first-order upwind (1) convected values.
  double upwind = 0.0;
  /// Sound speed over inlet velocity; only used for the lower tau heuristic.
  double sound_speed = 340.0 / 1.4;
  InletProfile inlet = InletProfile::Flat;
  GuardPolicy guard = GuardPolicy::Warn;
  PressureSolverKind pressure = PressureSolverKind::Auto;
  SorOptions sor{};

  double viscosity(const StepGeometry& geom) const noexcept;

  /// Throws ConfigError on hard violations (re, dt <= 0, tau < 0, upwind outside
  /// [0, 1]); returns soft warnings for the tau heuristics tau <= 1 and
  /// tau >= hx / c_s.
  std::vector<std::string> validate(const UniformGrid& grid) const;
};

/// Velocity and kinematic pressure at one instant.
struct FlowState {
  Field2D ux;
  Field2D uy;
  Field2D p;
  double t = 0.0;
  std::int64_t step = 0;

  FlowState() = default;
  FlowState(int nx, int ny) : ux(nx, ny), uy(nx, ny), p(nx, ny) {}
};

/// w = tau * ((u . grad) u + grad p), zero on walls.
struct RegularizingVelocity {
  Field2D wx;
  Field2D wy;
};

struct MassBalance {
  double inlet_flux = 0.0;
  double outlet_flux = 0.0;
  double relative_imbalance() const noexcept {
    return inlet_flux != 0.0 ? std::abs(inlet_flux - outlet_flux) / std::abs(inlet_flux) : 0.0;
  }
};

struct StepStats {
  double max_speed = 0.0;
  double stable_dt = 0.0;
  int pressure_iterations = 0;
  double pressure_residual = 0.0;
  std::int64_t guard_violations = 0;
};

/// Explicit QHD integrator on the step channel.
///
/// One step: regularizing velocity w from the current state, explicit momentum
/// predictor u*, elliptic solve for the new pressure from the regularized
/// continuity constraint, gradient correction of u* with the pressure increment,
/// boundary conditions.
class QhdSolver {
 public:
  QhdSolver(UniformGrid grid, SolverParams params);

  const UniformGrid& grid() const noexcept { return grid_; }
  const SolverParams& params() const noexcept { return params_; }
  double viscosity() const noexcept { return nu_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Prescribed inlet velocity at row j (zero outside the inlet section).
  double inlet_velocity(int j) const noexcept;
  /// Pressure gradient along x consistent with the inlet profile (0 for flat).
  double inlet_pressure_gradient() const noexcept { return inlet_dpdx_; }

  /// (u . grad) u with central differences inside, one-sided next to boundaries.
  VectorField advective_acceleration(const FlowState& state) const;
  RegularizingVelocity compute_w(const FlowState& state) const;

  /// Explicit predictor u* = u + dt * [-div(u u) - grad p + nu lap u + div(u w + w u)],
  /// with boundary values re-imposed.
  VectorField momentum_step(const FlowState& state, const RegularizingVelocity& w) const;

  /// New pressure from (tau + dt) lap p = div u* - tau div a + dt lap p_old,
  /// a = (u . grad) u. Its fixed point is tau lap p = div(u* - tau a).
  Field2D pressure_solve(const VectorField& u_star, const VectorField& advective,
                         const Field2D& prev_p);

  /// One full time step in place.
  void advance(FlowState& state);

  void impose_boundaries(FlowState& state) const;
  void impose_velocity_boundaries(Field2D& ux, Field2D& uy) const;

  /// Trapezoidal integral of ux over the active nodes of column i.
  double column_flux(const Field2D& ux, int i) const;
  MassBalance mass_balance(const FlowState& state) const;

  /// 0.4 * min(hx / |u|max, hx^2 / (4 nu + 4 tau)).
  double stable_time_step(double max_speed) const noexcept;

  const StepStats& last_step() const noexcept { return stats_; }

 private:
  void advective_into(const Field2D& ux, const Field2D& uy, Field2D& ax, Field2D& ay) const;
  void w_into(const Field2D& ax, const Field2D& ay, const Field2D& p, Field2D& wx,
              Field2D& wy) const;
  void momentum_into(const FlowState& s, const Field2D& wx, const Field2D& wy, Field2D& usx,
                     Field2D& usy) const;
  void pressure_into(const Field2D& usx, const Field2D& usy, const Field2D& ax,
                     const Field2D& ay, const Field2D& prev_p, Field2D& p_new);

  double ddx(const Field2D& f, int i, int j) const noexcept;
  double ddy(const Field2D& f, int i, int j) const noexcept;

  UniformGrid grid_;
  SolverParams params_;
  double nu_;
  double inlet_dpdx_ = 0.0;
  std::vector<double> inlet_profile_;
  std::vector<char> inlet_rows_;
  std::vector<std::size_t> no_slip_nodes_, inlet_nodes_, outlet_nodes_;
  std::vector<std::string> warnings_;
  std::unique_ptr<PressureSolver> pressure_;
  StepStats stats_;

  // per-step workspaces
  Field2D ax_, ay_, wx_, wy_, usx_, usy_, rhs_, lap_, pnew_;
  mutable std::vector<double> fx_ux_, fx_uy_, fy_ux_, fy_uy_;
};

/// Initial field: inlet profile continued downstream over the inlet rows, fluid
/// at rest behind the step, and a seeded uniform perturbation of the given
/// amplitude on uy within two rows of the step crest.
FlowState initial_state(const QhdSolver& solver, std::uint64_t seed, double amplitude = 1e-3);

}  // namespace qhd
