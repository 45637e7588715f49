#include "qhd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qhd/errors.hpp"

namespace qhd {

std::string_view to_string(InletProfile p) noexcept {
  return p == InletProfile::Flat ? "flat" : "parabolic";
}

InletProfile parse_inlet_profile(std::string_view text) {
  if (text == "flat") return InletProfile::Flat;
  if (text == "parabolic") return InletProfile::Parabolic;
  throw ConfigError("unknown inlet profile '" + std::string(text) + "'");
}

double SolverParams::viscosity(const StepGeometry& geom) const noexcept {
  const double length = geom.step_height_ratio > 0.0 ? geom.step_height() : geom.channel_height;
  return length / (re * geom.channel_height);
}

std::vector<std::string> SolverParams::validate(const UniformGrid& grid) const {
  std::ostringstream err;
  if (!(re > 0.0)) err << "re must be positive; ";
  if (!(dt > 0.0)) err << "dt must be positive; ";
  if (!(tau >= 0.0)) err << "tau must be non-negative; ";
  if (!(upwind >= 0.0 && upwind <= 1.0)) err << "upwind blend must lie in [0, 1]; ";
  if (!(sound_speed > 0.0)) err << "sound_speed must be positive; ";
  if (const auto msg = err.str(); !msg.empty()) throw ConfigError("solver: " + msg);

  std::vector<std::string> warn;
  if (tau > 1.0) {
    std::ostringstream os;
    os << "tau <= 1 heuristic violated (tau=" << tau
       << "): dissipative terms should stay well below the convective ones";
    warn.push_back(os.str());
  }
  if (tau > 0.0 && tau < grid.hx() / sound_speed) {
    std::ostringstream os;
    os << "tau >= hx/c_s heuristic violated (tau=" << tau << ", hx/c_s=" << grid.hx() / sound_speed
       << ")";
    warn.push_back(os.str());
  }
  return warn;
}

QhdSolver::QhdSolver(UniformGrid grid, SolverParams params)
    : grid_(std::move(grid)), params_(params), nu_(params.viscosity(grid_.geometry())) {
  warnings_ = params_.validate(grid_);
  pressure_ = make_pressure_solver(grid_, params_.pressure, params_.sor);

  const int nx = grid_.nx(), ny = grid_.ny();
  inlet_profile_.assign(ny, 0.0);
  int first = -1, last = -1;
  for (int j = 0; j < ny; ++j)
    if (grid_.kind(0, j) == CellKind::Inlet) {
      if (first < 0) first = j;
      last = j;
    }
  if (first >= 0) {
    const double y_lo = grid_.y(first - 1), y_hi = grid_.y(last + 1);
    const double width = y_hi - y_lo;
    for (int j = first; j <= last; ++j) {
      const double s = (grid_.y(j) - y_lo) / width;
      inlet_profile_[j] = params_.inlet == InletProfile::Flat ? 1.0 : 6.0 * s * (1.0 - s);
    }
    if (params_.inlet == InletProfile::Parabolic) inlet_dpdx_ = -12.0 * nu_ / (width * width);
    // the wall nodes closing the inlet section see the same ghost correction
    inlet_rows_.assign(ny, 0);
    for (int j = std::max(first - 1, 0); j <= std::min(last + 1, ny - 1); ++j) inlet_rows_[j] = 1;
  }

  for (std::size_t k = 0; k < grid_.size(); ++k) {
    switch (grid_.kind(k)) {
      case CellKind::Wall:
      case CellKind::Solid: no_slip_nodes_.push_back(k); break;
      case CellKind::Inlet: inlet_nodes_.push_back(k); break;
      case CellKind::Outlet: outlet_nodes_.push_back(k); break;
      case CellKind::Fluid: break;
    }
  }

  for (Field2D* f : {&ax_, &ay_, &wx_, &wy_, &usx_, &usy_, &rhs_, &lap_, &pnew_})
    *f = Field2D(nx, ny);
  for (auto* v : {&fx_ux_, &fx_uy_, &fy_ux_, &fy_uy_}) v->assign(grid_.size(), 0.0);
}

double QhdSolver::inlet_velocity(int j) const noexcept {
  return j >= 0 && j < static_cast<int>(inlet_profile_.size()) ? inlet_profile_[j] : 0.0;
}

double QhdSolver::ddx(const Field2D& f, int i, int j) const noexcept {
  const bool l = grid_.active(i - 1, j), r = grid_.active(i + 1, j);
  const double h = grid_.hx();
  if (l && r) return (f(i + 1, j) - f(i - 1, j)) / (2.0 * h);
  if (r) return (f(i + 1, j) - f(i, j)) / h;
  if (l) return (f(i, j) - f(i - 1, j)) / h;
  return 0.0;
}

double QhdSolver::ddy(const Field2D& f, int i, int j) const noexcept {
  const bool d = grid_.active(i, j - 1), u = grid_.active(i, j + 1);
  const double h = grid_.hy();
  if (d && u) return (f(i, j + 1) - f(i, j - 1)) / (2.0 * h);
  if (u) return (f(i, j + 1) - f(i, j)) / h;
  if (d) return (f(i, j) - f(i, j - 1)) / h;
  return 0.0;
}

void QhdSolver::advective_into(const Field2D& ux, const Field2D& uy, Field2D& ax,
                               Field2D& ay) const {
  const int nx = grid_.nx(), ny = grid_.ny();
  const double r2h = 0.5 / grid_.hx();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = ux.index(i, j);
      const CellKind kind = grid_.kind(k);
      if (kind == CellKind::Fluid) {
        const double u = ux[k], v = uy[k];
        ax[k] = r2h * (u * (ux[k + 1] - ux[k - 1]) + v * (ux[k + nx] - ux[k - nx]));
        ay[k] = r2h * (u * (uy[k + 1] - uy[k - 1]) + v * (uy[k + nx] - uy[k - nx]));
      } else if (kind == CellKind::Inlet || kind == CellKind::Outlet) {
        ax[k] = ux[k] * ddx(ux, i, j) + uy[k] * ddy(ux, i, j);
        ay[k] = ux[k] * ddx(uy, i, j) + uy[k] * ddy(uy, i, j);
      } else {
        ax[k] = 0.0;
        ay[k] = 0.0;
      }
    }
  }
}

void QhdSolver::w_into(const Field2D& ax, const Field2D& ay, const Field2D& p, Field2D& wx,
                       Field2D& wy) const {
  const int nx = grid_.nx(), ny = grid_.ny();
  const double tau = params_.tau;
  const double r2h = 0.5 / grid_.hx();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = p.index(i, j);
      const CellKind kind = grid_.kind(k);
      if (kind == CellKind::Fluid) {
        wx[k] = tau * (ax[k] + r2h * (p[k + 1] - p[k - 1]));
        wy[k] = tau * (ay[k] + r2h * (p[k + nx] - p[k - nx]));
      } else if (kind == CellKind::Inlet || kind == CellKind::Outlet) {
        wx[k] = tau * (ax[k] + ddx(p, i, j));
        wy[k] = tau * (ay[k] + ddy(p, i, j));
      } else {
        wx[k] = 0.0;
        wy[k] = 0.0;
      }
    }
  }
}

VectorField QhdSolver::advective_acceleration(const FlowState& s) const {
  VectorField a(grid_.nx(), grid_.ny());
  advective_into(s.ux, s.uy, a.x, a.y);
  return a;
}

RegularizingVelocity QhdSolver::compute_w(const FlowState& s) const {
  Field2D ax(grid_.nx(), grid_.ny()), ay(grid_.nx(), grid_.ny());
  advective_into(s.ux, s.uy, ax, ay);
  RegularizingVelocity w{Field2D(grid_.nx(), grid_.ny()), Field2D(grid_.nx(), grid_.ny())};
  w_into(ax, ay, s.p, w.wx, w.wy);
  return w;
}

void QhdSolver::momentum_into(const FlowState& s, const Field2D& wxf, const Field2D& wyf,
                              Field2D& usx, Field2D& usy) const {
  const int nx = grid_.nx(), ny = grid_.ny();
  const double h = grid_.hx();
  const double dt = params_.dt, nu = nu_, beta = params_.upwind;
  const double* ux = s.ux.data();
  const double* uy = s.uy.data();
  const double* p = s.p.data();
  const double* wx = wxf.data();
  const double* wy = wyf.data();
  double* fxu = fx_ux_.data();
  double* fxv = fx_uy_.data();
  double* fyu = fy_ux_.data();
  double* fyv = fy_uy_.data();
  const auto kinds = grid_.kinds();
  auto on = [&](std::size_t k) { return kinds[k] != CellKind::Solid; };

  // x-faces between (i, j) and (i + 1, j), stored at index of (i, j)
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 0; i < nx - 1; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i, r = k + 1;
      if (!on(k) || !on(r)) continue;
      const double u = 0.5 * (ux[k] + ux[r]), v = 0.5 * (uy[k] + uy[r]);
      const double a = 0.5 * (wx[k] + wx[r]), b = 0.5 * (wy[k] + wy[r]);
      double qu = u, qv = v;
      if (beta > 0.0) {
        const std::size_t up = u >= 0.0 ? k : r;
        qu = (1.0 - beta) * u + beta * ux[up];
        qv = (1.0 - beta) * v + beta * uy[up];
      }
      fxu[k] = u * qu - 2.0 * u * a;
      fxv[k] = u * qv - (u * b + a * v);
    }
  }
  // y-faces between (i, j) and (i, j + 1), stored at index of (i, j)
  for (int j = 0; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i, t = k + nx;
      if (!on(k) || !on(t)) continue;
      const double u = 0.5 * (ux[k] + ux[t]), v = 0.5 * (uy[k] + uy[t]);
      const double a = 0.5 * (wx[k] + wx[t]), b = 0.5 * (wy[k] + wy[t]);
      double qu = u, qv = v;
      if (beta > 0.0) {
        const std::size_t up = v >= 0.0 ? k : t;
        qu = (1.0 - beta) * u + beta * ux[up];
        qv = (1.0 - beta) * v + beta * uy[up];
      }
      fyu[k] = v * qu - (v * a + b * u);
      fyv[k] = v * qv - 2.0 * v * b;
    }
  }

  const double rh = 1.0 / h, rh2 = 1.0 / (h * h), r2h = 0.5 / h;
  double* sx = usx.data();
  double* sy = usy.data();
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (kinds[k] != CellKind::Fluid) {
      sx[k] = ux[k];
      sy[k] = uy[k];
      continue;
    }
    const double div_u = rh * (fxu[k] - fxu[k - 1] + fyu[k] - fyu[k - nx]);
    const double div_v = rh * (fxv[k] - fxv[k - 1] + fyv[k] - fyv[k - nx]);
    const double lap_u = rh2 * (ux[k - 1] + ux[k + 1] + ux[k - nx] + ux[k + nx] - 4.0 * ux[k]);
    const double lap_v = rh2 * (uy[k - 1] + uy[k + 1] + uy[k - nx] + uy[k + nx] - 4.0 * uy[k]);
    const double dpdx = r2h * (p[k + 1] - p[k - 1]);
    const double dpdy = r2h * (p[k + nx] - p[k - nx]);
    sx[k] = ux[k] + dt * (-div_u - dpdx + nu * lap_u);
    sy[k] = uy[k] + dt * (-div_v - dpdy + nu * lap_v);
  }
  impose_velocity_boundaries(usx, usy);
}

VectorField QhdSolver::momentum_step(const FlowState& s, const RegularizingVelocity& w) const {
  VectorField out(grid_.nx(), grid_.ny());
  momentum_into(s, w.wx, w.wy, out.x, out.y);
  return out;
}

void QhdSolver::pressure_into(const Field2D& usx, const Field2D& usy, const Field2D& ax,
                              const Field2D& ay, const Field2D& prev_p, Field2D& p_new) {
  const int nx = grid_.nx(), ny = grid_.ny();
  const double tau = params_.tau, dt = params_.dt;
  const double inv = 1.0 / (tau + dt);
  const double h = grid_.hx();
  const double r2h = 0.5 / h, rh2 = 1.0 / (h * h);
  const double inlet_term = tau * inv * 2.0 * inlet_dpdx_ / h;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = usx.index(i, j);
      const CellKind kind = grid_.kind(k);
      if (kind == CellKind::Solid) {
        rhs_[k] = 0.0;
        continue;
      }
      double div_us, div_a, lap_p;
      if (kind == CellKind::Fluid) {
        div_us = r2h * (usx[k + 1] - usx[k - 1] + usy[k + nx] - usy[k - nx]);
        div_a = r2h * (ax[k + 1] - ax[k - 1] + ay[k + nx] - ay[k - nx]);
        lap_p = rh2 * (prev_p[k - 1] + prev_p[k + 1] + prev_p[k - nx] + prev_p[k + nx] -
                       4.0 * prev_p[k]);
      } else {
        div_us = ddx(usx, i, j) + ddy(usy, i, j);
        div_a = ddx(ax, i, j) + ddy(ay, i, j);
        lap_p = laplacian_at(grid_, prev_p, i, j);
      }
      rhs_[k] = inv * (div_us - tau * div_a + dt * lap_p);
      if (i == 0 && inlet_term != 0.0 && inlet_rows_[j]) rhs_[k] += inlet_term;
    }
  }
  if (&p_new != &prev_p) p_new = prev_p;
  pressure_->solve(rhs_, p_new);
  stats_.pressure_iterations = pressure_->last_iterations();
  stats_.pressure_residual = pressure_->last_residual();
}

Field2D QhdSolver::pressure_solve(const VectorField& u_star, const VectorField& advective,
                                  const Field2D& prev_p) {
  Field2D out(grid_.nx(), grid_.ny());
  pressure_into(u_star.x, u_star.y, advective.x, advective.y, prev_p, out);
  return out;
}

void QhdSolver::advance(FlowState& s) {
  const int nx = grid_.nx();
  const double dt = params_.dt, r2h = 0.5 / grid_.hx();

  advective_into(s.ux, s.uy, ax_, ay_);
  w_into(ax_, ay_, s.p, wx_, wy_);
  momentum_into(s, wx_, wy_, usx_, usy_);
  pressure_into(usx_, usy_, ax_, ay_, s.p, pnew_);

  const auto kinds = grid_.kinds();
  double* ux = s.ux.data();
  double* uy = s.uy.data();
  const double* sx = usx_.data();
  const double* sy = usy_.data();
  const double* pn = pnew_.data();
  const double* po = s.p.data();
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (kinds[k] == CellKind::Fluid) {
      const double dpx = (pn[k + 1] - po[k + 1]) - (pn[k - 1] - po[k - 1]);
      const double dpy = (pn[k + nx] - po[k + nx]) - (pn[k - nx] - po[k - nx]);
      ux[k] = sx[k] - dt * r2h * dpx;
      uy[k] = sy[k] - dt * r2h * dpy;
    } else {
      ux[k] = sx[k];
      uy[k] = sy[k];
    }
  }
  std::swap(s.p, pnew_);
  impose_boundaries(s);
  ++s.step;
  s.t = static_cast<double>(s.step) * dt;

  double max2 = 0.0;
  bool finite = true;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const double q = ux[k] * ux[k] + uy[k] * uy[k];
    finite = finite && std::isfinite(q) && std::isfinite(s.p[k]);
    max2 = std::max(max2, q);
  }
  if (!finite) {
    std::ostringstream os;
    os << "non-finite flow field at t=" << s.t << " (step " << s.step << ")";
    throw BlowUpError(os.str(), s.t);
  }
  stats_.max_speed = std::sqrt(max2);
  stats_.stable_dt = stable_time_step(stats_.max_speed);
  if (dt > stats_.stable_dt) {
    ++stats_.guard_violations;
    std::ostringstream os;
    os << "time step " << dt << " exceeds stability guard " << stats_.stable_dt << " at t=" << s.t;
    if (params_.guard == GuardPolicy::Strict) throw StepSizeError(os.str());
    if (stats_.guard_violations == 1) warnings_.push_back(os.str());
  }
}

void QhdSolver::impose_velocity_boundaries(Field2D& ux, Field2D& uy) const {
  for (const std::size_t k : no_slip_nodes_) {
    ux[k] = 0.0;
    uy[k] = 0.0;
  }
  for (const std::size_t k : inlet_nodes_) {
    ux[k] = inlet_profile_[k / grid_.nx()];
    uy[k] = 0.0;
  }
  for (const std::size_t k : outlet_nodes_) {
    ux[k] = ux[k - 1];
    uy[k] = uy[k - 1];
  }
}

void QhdSolver::impose_boundaries(FlowState& s) const {
  impose_velocity_boundaries(s.ux, s.uy);
  for (std::size_t k = 0; k < grid_.size(); ++k)
    if (grid_.kind(k) == CellKind::Solid) s.p[k] = 0.0;
}

double QhdSolver::column_flux(const Field2D& ux, int i) const {
  double sum = 0.0;
  int first = -1, last = -1;
  for (int j = 0; j < grid_.ny(); ++j) {
    if (!grid_.active(i, j)) continue;
    if (first < 0) first = j;
    last = j;
    sum += ux(i, j);
  }
  if (first < 0) return 0.0;
  sum -= 0.5 * (ux(i, first) + ux(i, last));
  return sum * grid_.hy();
}

MassBalance QhdSolver::mass_balance(const FlowState& s) const {
  return {column_flux(s.ux, 0), column_flux(s.ux, grid_.nx() - 1)};
}

double QhdSolver::stable_time_step(double max_speed) const noexcept {
  const double h = grid_.hx();
  const double adv = max_speed > 0.0 ? h / max_speed : std::numeric_limits<double>::infinity();
  const double diff = h * h / (4.0 * nu_ + 4.0 * params_.tau);
  return 0.4 * std::min(adv, diff);
}

FlowState initial_state(const QhdSolver& solver, std::uint64_t seed, double amplitude) {
  const UniformGrid& g = solver.grid();
  FlowState s(g.nx(), g.ny());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (g.active(i, j)) s.ux(i, j) = solver.inlet_velocity(j);

  std::mt19937_64 rng(seed);
  const bool bottom = g.geometry().side == StepSide::Bottom;
  for (int j = 0; j < g.ny(); ++j) {
    const int from_wall = bottom ? j : g.ny() - 1 - j;
    if (std::abs(from_wall - g.step_row()) > 2) continue;
    for (int i = 0; i < g.nx(); ++i) {
      if (g.kind(i, j) != CellKind::Fluid) continue;
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      s.uy(i, j) = amplitude * (2.0 * unit - 1.0);
    }
  }

  const double dpdx = solver.inlet_pressure_gradient();
  if (dpdx != 0.0) {
    const double x_out = g.geometry().channel_length;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (g.active(i, j)) s.p(i, j) = dpdx * (g.x(i) - x_out);
  }
  solver.impose_boundaries(s);
  return s;
}

}  // namespace qhd
