#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qhd {

/// Which channel wall carries the step. Bottom is the physical configuration;
/// Top is the mirror image used to check the classifier and detectors for symmetry.
enum class StepSide : std::uint8_t { Bottom, Top };

/// Backward-facing step channel in units of the channel height H.
///
/// The step occupies the rectangle [0, step_x) x [0, h) next to the stepped wall;
/// with step_x = 0 the inlet section coincides with the step plane and inflow
/// enters over the upper 1 - h/H of the left boundary. A step_height_ratio of 0
/// describes a plain channel (used by verification problems).
struct StepGeometry {
  double channel_height = 1.0;
  double step_height_ratio = 0.5;
  double channel_length = 5.0;
  double step_x = 0.0;
  StepSide side = StepSide::Bottom;

  double step_height() const noexcept { return step_height_ratio * channel_height; }
  double inlet_height() const noexcept { return channel_height - step_height(); }

  /// Same geometry reflected across the channel centreline.
  StepGeometry mirrored() const noexcept {
    StepGeometry g = *this;
    g.side = side == StepSide::Bottom ? StepSide::Top : StepSide::Bottom;
    return g;
  }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  friend bool operator==(const StepGeometry&, const StepGeometry&) = default;
};

enum class CellKind : std::uint8_t { Fluid, Solid, Inlet, Outlet, Wall };

std::string_view to_string(CellKind kind) noexcept;

/// Uniform node-centred grid over the step channel, hx = hy.
///
/// Node (i, j) sits at (i * hx, j * hy); nx = L / hx and ny = H / hx as in the
/// "Ny x Nx" grid notation, so the stored nodes span the channel to within one
/// grid step.
class UniformGrid {
 public:
  UniformGrid(const StepGeometry& geom, double h, int nx, int ny);

  const StepGeometry& geometry() const noexcept { return geom_; }
  double hx() const noexcept { return h_; }
  double hy() const noexcept { return h_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return kinds_.size(); }

  double x(int i) const noexcept { return i * h_; }
  double y(int j) const noexcept { return j * h_; }

  /// Row offset of the step crest from the stepped wall.
  int step_row() const noexcept { return step_row_; }
  /// Column index of the step face.
  int step_column() const noexcept { return step_col_; }

  CellKind kind(int i, int j) const noexcept {
    return kinds_[static_cast<std::size_t>(j) * nx_ + i];
  }
  CellKind kind(std::size_t k) const noexcept { return kinds_[k]; }
  std::span<const CellKind> kinds() const noexcept { return kinds_; }

  bool in_range(int i, int j) const noexcept { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
  /// Nodes that carry flow variables (everything except the solid block).
  bool active(int i, int j) const noexcept {
    return in_range(i, j) && kind(i, j) != CellKind::Solid;
  }
  /// True when no node is solid, i.e. the flow domain is a rectangle.
  bool rectangular() const noexcept { return rectangular_; }

  friend bool operator==(const UniformGrid& a, const UniformGrid& b) {
    return a.geom_ == b.geom_ && a.h_ == b.h_ && a.nx_ == b.nx_ && a.ny_ == b.ny_ &&
           a.kinds_ == b.kinds_;
  }

 private:
  CellKind compute_kind(int i, int j) const noexcept;

  StepGeometry geom_;
  double h_;
  int nx_;
  int ny_;
  int step_row_;
  int step_col_;
  bool rectangular_ = true;
  std::vector<CellKind> kinds_;
};

/// Builds the grid for a geometry and grid step.
///
/// hx must divide both the channel height and length to 1e-9 relative. Steps
/// printed to five decimals (0.00833 for 1/120) are snapped to the exact
/// reciprocal when they agree with it to half a unit in the last printed digit.
UniformGrid build_grid(const StepGeometry& geom, double hx);

/// Kind of node (i, j). Throws UsageError when the index is outside the grid.
CellKind classify_cell(const UniformGrid& grid, int i, int j);

}  // namespace qhd
