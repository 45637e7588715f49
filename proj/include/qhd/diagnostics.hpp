#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qhd/field.hpp"
#include "qhd/grid.hpp"
#include "qhd/solver.hpp"

namespace qhd {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

enum class Component { Ux, Uy };
std::string_view to_string(Component c) noexcept;
Component parse_component(std::string_view text);

struct ProbeSample {
  double t;
  double ux;
  double uy;
};

/// Velocity history at one monitor point, sampled every sample_interval.
struct ProbeSeries {
  Point location;
  double sample_interval = 0.05;
  std::vector<ProbeSample> samples;

  /// Throws UsageError unless times increase with spacing sample_interval +- 1e-12.
  void validate() const;
  /// Values of one component for samples with t >= t_start.
  std::vector<double> component(Component c, double t_start = -1.0) const;
};

/// Bilinear interpolation of a node field at (x, y), clamped to the grid.
double sample_bilinear(const UniformGrid& grid, const Field2D& f, double x, double y);

/// Samples probes every `interval` time units; the solver's integer step count
/// keeps sample times exact multiples of the interval.
class ProbeRecorder {
 public:
  ProbeRecorder(const UniformGrid& grid, std::vector<Point> locations, double interval, double dt);

  /// Records when the state's step is a multiple of the sampling stride.
  void observe(const FlowState& state);
  const std::vector<ProbeSeries>& series() const noexcept { return series_; }
  std::int64_t stride() const noexcept { return stride_; }

 private:
  const UniformGrid* grid_;
  std::int64_t stride_;
  double dt_;
  std::vector<ProbeSeries> series_;
};

/// Time-averaged velocity (and pressure) over [t1, t2].
struct AveragedField {
  double t1 = 0.0;
  double t2 = 0.0;
  Field2D ux_av;
  Field2D uy_av;
  Field2D p_av;
  std::optional<Field2D> psi;
  int n_frames = 0;
};

/// Streaming trapezoidal time average over uniformly spaced frames.
class AverageAccumulator {
 public:
  AverageAccumulator(int nx, int ny);

  /// Frames must arrive in time order with constant spacing.
  void add(const Field2D& ux, const Field2D& uy, const Field2D& p, double t);
  void add(const FlowState& s) { add(s.ux, s.uy, s.p, s.t); }

  int frames() const noexcept { return n_; }
  /// Throws UsageError with fewer than two frames.
  AveragedField result() const;

 private:
  Field2D sum_ux_, sum_uy_, sum_p_;
  Field2D first_ux_, first_uy_, first_p_;
  Field2D last_ux_, last_uy_, last_p_;
  double t_first_ = 0.0;
  double t_last_ = 0.0;
  double spacing_ = 0.0;
  int n_ = 0;
};

AveragedField accumulate_average(std::span<const FlowState> snapshots);

/// psi(x, y) = integral of ux from the stepped wall up to y, trapezoidal rule,
/// psi = 0 on that wall (on top of the step for columns upstream of the step).
Field2D stream_function(const Field2D& ux, const UniformGrid& grid);
Field2D stream_function(const AveragedField& avg, const UniformGrid& grid);

struct Reattachment {
  enum class Kind { Attached, Bounded, Unbounded };
  Kind kind = Kind::Attached;
  /// L_s / h; 0 when attached, NaN when unbounded.
  double length_over_h = 0.0;
  /// Abscissa of the reattachment point, NaN when unbounded.
  double x = 0.0;

  bool unbounded() const noexcept { return kind == Kind::Unbounded; }
};

/// Reattachment from the sign of ux one node off the stepped wall downstream of
/// the step: the most downstream negative-to-positive crossing preceded by at
/// least three negative nodes, linearly interpolated. Recirculation that reaches
/// any of the last four interior nodes before the outlet is reported as unbounded.
Reattachment reattachment_length(const Field2D& ux, const UniformGrid& grid);
inline Reattachment reattachment_length(const AveragedField& avg, const UniformGrid& grid) {
  return reattachment_length(avg.ux_av, grid);
}

/// Height (above the stepped wall) of the streamline leaving the step corner,
/// per column; NaN where the column has no crossing.
std::vector<double> dividing_streamline(const Field2D& psi, const UniformGrid& grid);

/// True when the dividing streamline descends monotonically onto the wall over
/// the last three columns before x_reattach (no backward bending).
bool dividing_streamline_regular(const Field2D& psi, const UniformGrid& grid, double x_reattach);

struct Trajectory {
  enum class Stop { Running, Wall, Outlet, Inlet, EndOfData };
  std::vector<std::array<double, 3>> points;  // (t, x, y)
  Stop stop = Stop::Running;
};

std::string_view to_string(Trajectory::Stop s) noexcept;

/// Passive particles advected with the midpoint rule through velocity that is
/// bilinear in space and linear in time between snapshots. Particles stop when
/// they leave the fluid through a wall, the outlet or the inlet plane.
std::vector<Trajectory> trace_particles(std::span<const FlowState> snapshots,
                                        const UniformGrid& grid, std::span<const Point> seeds,
                                        double step = 1e-3, double max_snapshot_spacing = 0.5);

}  // namespace qhd
