#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace qhd {

/// Node-centred scalar field stored row-major: index = j * nx + i, j along y.
class Field2D {
 public:
  Field2D() = default;
  Field2D(int nx, int ny, double value = 0.0)
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, value) {}

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int i, int j) noexcept { return data_[index(i, j)]; }
  double operator()(int i, int j) const noexcept { return data_[index(i, j)]; }
  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * nx_ + i;
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Field2D& o) const noexcept { return nx_ == o.nx_ && ny_ == o.ny_; }

  friend bool operator==(const Field2D&, const Field2D&) = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> data_;
};

/// A pair of velocity-like components on the same grid.
struct VectorField {
  Field2D x;
  Field2D y;

  VectorField() = default;
  VectorField(int nx, int ny, double vx = 0.0, double vy = 0.0) : x(nx, ny, vx), y(nx, ny, vy) {}
};

}  // namespace qhd
