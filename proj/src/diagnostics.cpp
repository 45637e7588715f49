#include "qhd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qhd/errors.hpp"

namespace qhd {

std::string_view to_string(Component c) noexcept { return c == Component::Ux ? "ux" : "uy"; }

Component parse_component(std::string_view text) {
  if (text == "ux") return Component::Ux;
  if (text == "uy") return Component::Uy;
  throw UsageError("unknown velocity component '" + std::string(text) + "'");
}

void ProbeSeries::validate() const {
  for (std::size_t n = 1; n < samples.size(); ++n) {
    const double gap = samples[n].t - samples[n - 1].t;
    if (!(std::abs(gap - sample_interval) <= 1e-12)) {
      std::ostringstream os;
      os << "probe series: irregular sample spacing " << gap << " at t=" << samples[n].t
         << " (expected " << sample_interval << ")";
      throw UsageError(os.str());
    }
  }
}

std::vector<double> ProbeSeries::component(Component c, double t_start) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    if (s.t >= t_start - 1e-12) out.push_back(c == Component::Ux ? s.ux : s.uy);
  return out;
}

double sample_bilinear(const UniformGrid& grid, const Field2D& f, double x, double y) {
  const double h = grid.hx();
  const double gx = std::clamp(x / h, 0.0, grid.nx() - 1.0);
  const double gy = std::clamp(y / h, 0.0, grid.ny() - 1.0);
  const int i = std::min(static_cast<int>(gx), grid.nx() - 2);
  const int j = std::min(static_cast<int>(gy), grid.ny() - 2);
  const double fx = gx - i, fy = gy - j;
  return (1 - fx) * (1 - fy) * f(i, j) + fx * (1 - fy) * f(i + 1, j) + (1 - fx) * fy * f(i, j + 1) +
         fx * fy * f(i + 1, j + 1);
}

ProbeRecorder::ProbeRecorder(const UniformGrid& grid, std::vector<Point> locations,
                             double interval, double dt)
    : grid_(&grid), dt_(dt) {
  const double ratio = interval / dt;
  stride_ = std::llround(ratio);
  if (stride_ <= 0 || std::abs(stride_ * dt - interval) > 1e-12 * std::max(1.0, interval))
    throw ConfigError("probe interval must be a whole number of time steps");
  for (const auto& loc : locations) {
    ProbeSeries s;
    s.location = loc;
    s.sample_interval = interval;
    series_.push_back(std::move(s));
  }
}

void ProbeRecorder::observe(const FlowState& state) {
  if (state.step % stride_ != 0) return;
  const double t = static_cast<double>(state.step) * dt_;
  for (auto& s : series_) {
    s.samples.push_back({t, sample_bilinear(*grid_, state.ux, s.location.x, s.location.y),
                         sample_bilinear(*grid_, state.uy, s.location.x, s.location.y)});
  }
}

AverageAccumulator::AverageAccumulator(int nx, int ny)
    : sum_ux_(nx, ny), sum_uy_(nx, ny), sum_p_(nx, ny) {}

void AverageAccumulator::add(const Field2D& ux, const Field2D& uy, const Field2D& p, double t) {
  if (!ux.same_shape(sum_ux_)) throw UsageError("average: frame shape mismatch");
  if (n_ == 1) {
    spacing_ = t - t_first_;
    if (!(spacing_ > 0.0)) throw UsageError("average: frames must be in increasing time order");
  } else if (n_ > 1) {
    const double gap = t - t_last_;
    if (std::abs(gap - spacing_) > 1e-9 * std::max(1.0, spacing_))
      throw UsageError("average: frames must be uniformly spaced");
  }
  for (std::size_t k = 0; k < ux.size(); ++k) {
    sum_ux_[k] += ux[k];
    sum_uy_[k] += uy[k];
    sum_p_[k] += p[k];
  }
  if (n_ == 0) {
    first_ux_ = ux;
    first_uy_ = uy;
    first_p_ = p;
    t_first_ = t;
  }
  last_ux_ = ux;
  last_uy_ = uy;
  last_p_ = p;
  t_last_ = t;
  ++n_;
}

AveragedField AverageAccumulator::result() const {
  if (n_ < 2) throw UsageError("average: at least two snapshots are required");
  AveragedField out;
  out.t1 = t_first_;
  out.t2 = t_last_;
  out.n_frames = n_;
  // trapezoid: interior frames weight 1, end frames weight 1/2, times spacing
  const double scale = spacing_ / (t_last_ - t_first_);
  auto finish = [&](const Field2D& sum, const Field2D& a, const Field2D& b) {
    Field2D f(sum.nx(), sum.ny());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = scale * (sum[k] - 0.5 * (a[k] + b[k]));
    return f;
  };
  out.ux_av = finish(sum_ux_, first_ux_, last_ux_);
  out.uy_av = finish(sum_uy_, first_uy_, last_uy_);
  out.p_av = finish(sum_p_, first_p_, last_p_);
  return out;
}

AveragedField accumulate_average(std::span<const FlowState> snapshots) {
  if (snapshots.size() < 2) throw UsageError("average: at least two snapshots are required");
  AverageAccumulator acc(snapshots.front().ux.nx(), snapshots.front().ux.ny());
  for (const auto& s : snapshots) acc.add(s);
  return acc.result();
}

namespace {

bool bottom(const UniformGrid& g) { return g.geometry().side == StepSide::Bottom; }

// Row index counted from the stepped wall.
int row_from_wall(const UniformGrid& g, int r) { return bottom(g) ? r : g.ny() - 1 - r; }

}  // namespace

Field2D stream_function(const Field2D& ux, const UniformGrid& grid) {
  Field2D psi(grid.nx(), grid.ny());
  const double h = grid.hy();
  // Integrate away from the stepped wall; on the top-step mirror image the
  // integration runs downward and flips sign so psi mirrors as well.
  const double sign = bottom(grid) ? 1.0 : -1.0;
  for (int i = 0; i < grid.nx(); ++i) {
    double acc = 0.0;
    int prev = -1;
    for (int r = 0; r < grid.ny(); ++r) {
      const int j = row_from_wall(grid, r);
      if (!grid.active(i, j)) continue;
      if (prev >= 0) acc += 0.5 * h * (ux(i, prev) + ux(i, j));
      psi(i, j) = sign * acc;
      prev = j;
    }
  }
  return psi;
}

Field2D stream_function(const AveragedField& avg, const UniformGrid& grid) {
  return stream_function(avg.ux_av, grid);
}

Reattachment reattachment_length(const Field2D& ux, const UniformGrid& grid) {
  const int j = row_from_wall(grid, 1);
  const int i0 = grid.step_column() + 1;
  const int i_last = grid.nx() - 2;  // last interior column before the outlet
  const double h_step = grid.geometry().step_height();
  const double x_step = grid.geometry().step_x;

  // The outflow condition turns near-wall reversed flow positive over the last
  // few columns, so reversal anywhere in that band counts as reaching the outlet.
  constexpr int outlet_band = 4;
  bool reaches_outlet = false;
  for (int i = std::max(i0, i_last - outlet_band + 1); i <= i_last; ++i)
    reaches_outlet = reaches_outlet || ux(i, j) < 0.0;

  Reattachment r;
  if (reaches_outlet) {
    r.kind = Reattachment::Kind::Unbounded;
    r.length_over_h = std::numeric_limits<double>::quiet_NaN();
    r.x = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  for (int i = i_last; i >= i0 + 3; --i) {
    if (ux(i, j) >= 0.0 && ux(i - 1, j) < 0.0 && ux(i - 2, j) < 0.0 && ux(i - 3, j) < 0.0) {
      const double a = ux(i - 1, j), b = ux(i, j);
      const double xc = grid.x(i - 1) + grid.hx() * (-a) / (b - a);
      r.kind = Reattachment::Kind::Bounded;
      r.x = xc;
      r.length_over_h = (xc - x_step) / h_step;
      return r;
    }
  }
  return r;
}

std::vector<double> dividing_streamline(const Field2D& psi, const UniformGrid& grid) {
  const int corner_row = row_from_wall(grid, grid.step_row());
  const double psi_c = psi(grid.step_column(), corner_row);
  const double sign = bottom(grid) ? 1.0 : -1.0;
  std::vector<double> height(grid.nx(), std::numeric_limits<double>::quiet_NaN());
  for (int i = grid.step_column() + 1; i < grid.nx(); ++i) {
    for (int r = 1; r < grid.ny(); ++r) {
      const double a = sign * (psi(i, row_from_wall(grid, r - 1)) - psi_c);
      const double b = sign * (psi(i, row_from_wall(grid, r)) - psi_c);
      if (r > 1 && a < 0.0 && b >= 0.0) {
        height[i] = grid.hy() * ((r - 1) + (-a) / (b - a));
        break;
      }
    }
  }
  return height;
}

bool dividing_streamline_regular(const Field2D& psi, const UniformGrid& grid, double x_reattach) {
  const auto height = dividing_streamline(psi, grid);
  const int last = static_cast<int>(std::floor(x_reattach / grid.hx()));
  std::vector<double> tail;
  for (int i = last; i > grid.step_column() && tail.size() < 3; --i)
    if (!std::isnan(height[i])) tail.push_back(height[i]);
  if (tail.size() < 3) return true;
  // tail runs upstream; heights must not decrease going upstream
  return tail[0] <= tail[1] && tail[1] <= tail[2];
}

std::string_view to_string(Trajectory::Stop s) noexcept {
  switch (s) {
    case Trajectory::Stop::Running: return "running";
    case Trajectory::Stop::Wall: return "wall";
    case Trajectory::Stop::Outlet: return "outlet";
    case Trajectory::Stop::Inlet: return "inlet";
    case Trajectory::Stop::EndOfData: return "end";
  }
  return "?";
}

namespace {

bool inside_solid(const UniformGrid& g, double x, double y) {
  const auto& geom = g.geometry();
  const double yb = bottom(g) ? y : g.y(g.ny() - 1) - y;
  return x < geom.step_x && yb < g.step_row() * g.hy();
}

Trajectory::Stop exit_reason(const UniformGrid& g, double x, double y) {
  const double x_max = g.x(g.nx() - 1), y_max = g.y(g.ny() - 1);
  if (x >= x_max) return Trajectory::Stop::Outlet;
  if (x < 0.0) return Trajectory::Stop::Inlet;
  if (y <= 0.0 || y >= y_max || inside_solid(g, x, y)) return Trajectory::Stop::Wall;
  return Trajectory::Stop::Running;
}

}  // namespace

std::vector<Trajectory> trace_particles(std::span<const FlowState> snapshots,
                                        const UniformGrid& grid, std::span<const Point> seeds,
                                        double step, double max_snapshot_spacing) {
  if (snapshots.empty()) throw UsageError("trace: no snapshots");
  for (std::size_t n = 1; n < snapshots.size(); ++n) {
    const double gap = snapshots[n].t - snapshots[n - 1].t;
    if (!(gap > 0.0)) throw UsageError("trace: snapshots must be in increasing time order");
    if (gap > max_snapshot_spacing + 1e-12) throw UsageError("trace: snapshot spacing too large");
  }
  for (const auto& s : seeds)
    if (exit_reason(grid, s.x, s.y) != Trajectory::Stop::Running) {
      std::ostringstream os;
      os << "trace: seed (" << s.x << ", " << s.y << ") is not inside the fluid";
      throw UsageError(os.str());
    }
  if (!(step > 0.0)) throw UsageError("trace: integration step must be positive");

  const double t_begin = snapshots.front().t, t_end = snapshots.back().t;
  auto velocity = [&](double x, double y, double t) {
    if (snapshots.size() == 1) {
      const auto& s = snapshots.front();
      return Point{sample_bilinear(grid, s.ux, x, y), sample_bilinear(grid, s.uy, x, y)};
    }
    auto it = std::upper_bound(snapshots.begin(), snapshots.end(), t,
                               [](double v, const FlowState& s) { return v < s.t; });
    std::size_t hi = std::clamp<std::size_t>(it - snapshots.begin(), 1, snapshots.size() - 1);
    const auto& a = snapshots[hi - 1];
    const auto& b = snapshots[hi];
    const double w = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    return Point{(1 - w) * sample_bilinear(grid, a.ux, x, y) + w * sample_bilinear(grid, b.ux, x, y),
                 (1 - w) * sample_bilinear(grid, a.uy, x, y) + w * sample_bilinear(grid, b.uy, x, y)};
  };

  // A single frozen snapshot is integrated for one unit of time per call.
  const double horizon = snapshots.size() == 1 ? 1.0 : t_end - t_begin;
  const auto n_steps = static_cast<std::int64_t>(std::floor(horizon / step + 1e-9));

  std::vector<Trajectory> out;
  out.reserve(seeds.size());
  for (const auto& seed : seeds) {
    Trajectory tr;
    double x = seed.x, y = seed.y;
    tr.points.push_back({t_begin, x, y});
    for (std::int64_t n = 0; n < n_steps; ++n) {
      const double t = t_begin + static_cast<double>(n) * step;
      const Point k1 = velocity(x, y, t);
      const double xm = x + 0.5 * step * k1.x, ym = y + 0.5 * step * k1.y;
      const Point k2 = velocity(xm, ym, t + 0.5 * step);
      x += step * k2.x;
      y += step * k2.y;
      tr.points.push_back({t + step, x, y});
      tr.stop = exit_reason(grid, x, y);
      if (tr.stop != Trajectory::Stop::Running) break;
    }
    if (tr.stop == Trajectory::Stop::Running) tr.stop = Trajectory::Stop::EndOfData;
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace qhd
