#pragma once

#include <cmath>
#include <random>

#include "qhd/field.hpp"
#include "qhd/grid.hpp"

namespace qhd::test {

/// Straight channel of height 1 without a step.
inline StepGeometry plain_channel(double length) {
  StepGeometry g;
  g.step_height_ratio = 0.0;
  g.channel_length = length;
  return g;
}

inline double max_abs_diff(const Field2D& a, const Field2D& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline Field2D random_field(int nx, int ny, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Field2D f(nx, ny);
  for (double& v : f.values()) v = d(rng);
  return f;
}

}  // namespace qhd::test
