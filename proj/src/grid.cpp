#include "qhd/grid.hpp"

#include <cmath>
#include <sstream>

#include "qhd/errors.hpp"

namespace qhd {

namespace {

constexpr double kDivisibilityTol = 1e-9;
// Tables print steps to five decimals; 0.00833 stands for 1/120.
constexpr double kPrintedStepTol = 5e-6;

bool divides(double length, double h, long& count) {
  const double ratio = length / h;
  count = std::lround(ratio);
  return count > 0 && std::abs(count * h - length) <= kDivisibilityTol * length;
}

}  // namespace

std::string_view to_string(CellKind kind) noexcept {
  switch (kind) {
    case CellKind::Fluid: return "fluid";
    case CellKind::Solid: return "solid";
    case CellKind::Inlet: return "inlet";
    case CellKind::Outlet: return "outlet";
    case CellKind::Wall: return "wall";
  }
  return "?";
}

void StepGeometry::validate() const {
  std::ostringstream err;
  if (!(channel_height > 0.0)) err << "channel_height must be positive; ";
  if (!(step_height_ratio >= 0.0 && step_height_ratio < 1.0))
    err << "step_height_ratio must lie in [0, 1), got " << step_height_ratio << "; ";
  if (!(channel_length > channel_height))
    err << "channel_length must exceed the channel height, got " << channel_length << "; ";
  if (!(step_x >= 0.0 && step_x < channel_length))
    err << "step_x must lie in [0, L), got " << step_x << "; ";
  if (const auto msg = err.str(); !msg.empty()) throw ConfigError("geometry: " + msg);
}

UniformGrid::UniformGrid(const StepGeometry& geom, double h, int nx, int ny)
    : geom_(geom), h_(h), nx_(nx), ny_(ny) {
  step_row_ = static_cast<int>(std::lround(geom.step_height() / h));
  step_col_ = static_cast<int>(std::lround(geom.step_x / h));
  if (nx_ < 3 || ny_ < 3) throw ConfigError("grid: at least 3 nodes per direction required");
  if (step_row_ >= ny_ - 1) throw ConfigError("grid: step crest does not leave an inlet section");
  if (step_col_ >= nx_ - 1) throw ConfigError("grid: step face at or beyond the outlet");
  kinds_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) {
      const CellKind k = compute_kind(i, j);
      kinds_[static_cast<std::size_t>(j) * nx_ + i] = k;
      if (k == CellKind::Solid) rectangular_ = false;
    }
}

CellKind UniformGrid::compute_kind(int i, int j) const noexcept {
  // Work in coordinates where the step sits on the bottom wall.
  const int jb = geom_.side == StepSide::Bottom ? j : ny_ - 1 - j;
  const int top = ny_ - 1;
  if (i < step_col_ && jb < step_row_) return CellKind::Solid;
  if (jb == top) return CellKind::Wall;
  if (jb == 0 && i >= step_col_) return CellKind::Wall;
  if (i == step_col_ && jb <= step_row_) return CellKind::Wall;  // step face
  if (jb == step_row_ && i < step_col_) return CellKind::Wall;   // step top
  if (i == 0) return CellKind::Inlet;
  if (i == nx_ - 1) return CellKind::Outlet;
  return CellKind::Fluid;
}

UniformGrid build_grid(const StepGeometry& geom, double hx) {
  geom.validate();
  if (!(hx > 0.0)) throw ConfigError("grid: hx must be positive");

  long ny = 0, nx = 0;
  double h = hx;
  if (!divides(geom.channel_height, h, ny)) {
    const double snapped = geom.channel_height / static_cast<double>(ny);
    if (ny > 0 && std::abs(snapped - hx) <= kPrintedStepTol) {
      h = snapped;
    } else {
      std::ostringstream os;
      os << "grid: hx=" << hx << " does not divide channel_height=" << geom.channel_height;
      throw ConfigError(os.str());
    }
  }
  if (!divides(geom.channel_length, h, nx)) {
    std::ostringstream os;
    os << "grid: hx=" << hx << " does not divide channel_length=" << geom.channel_length;
    throw ConfigError(os.str());
  }
  return UniformGrid(geom, h, static_cast<int>(nx), static_cast<int>(ny));
}

CellKind classify_cell(const UniformGrid& grid, int i, int j) {
  if (!grid.in_range(i, j)) {
    std::ostringstream os;
    os << "classify_cell: index (" << i << ", " << j << ") outside " << grid.nx() << " x "
       << grid.ny() << " grid";
    throw UsageError(os.str());
  }
  return grid.kind(i, j);
}

}  // namespace qhd
