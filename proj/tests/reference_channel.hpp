#pragma once

#include <Eigen/Dense>

#include "qhd/field.hpp"
#include "qhd/solver.hpp"

namespace qhd::test {

/// Plain incompressible projection scheme on a straight channel written out
/// independently: flux-form central advection with face averages, five-point
/// viscous term, central pressure gradient, incremental pressure projection
/// dt L p_new = div u* + dt L p_old with mirror ghosts on walls and inlet and
/// p = 0 one step beyond the last column.
class ReferenceChannel {
 public:
  ReferenceChannel(int nx, int ny, double h, double nu, double dt)
      : nx_(nx), ny_(ny), h_(h), nu_(nu), dt_(dt), lap_(nx * ny, nx * ny) {
    lap_.setZero();
    const double r = 1.0 / (h * h);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int k = id(i, j);
        // x direction
        if (i == 0) {
          lap_(k, id(1, j)) += 2 * r;
        } else if (i == nx - 1) {
          lap_(k, id(i - 1, j)) += r;
        } else {
          lap_(k, id(i - 1, j)) += r;
          lap_(k, id(i + 1, j)) += r;
        }
        lap_(k, k) -= 2 * r;
        // y direction
        if (j == 0) lap_(k, id(i, 1)) += 2 * r;
        else if (j == ny - 1) lap_(k, id(i, j - 1)) += 2 * r;
        else {
          lap_(k, id(i, j - 1)) += r;
          lap_(k, id(i, j + 1)) += r;
        }
        lap_(k, k) -= 2 * r;
      }
    lu_ = lap_.partialPivLu();
  }

  int id(int i, int j) const { return j * nx_ + i; }
  bool interior(int i, int j) const { return i > 0 && i < nx_ - 1 && j > 0 && j < ny_ - 1; }

  void boundaries(Field2D& u, Field2D& v) const {
    for (int i = 0; i < nx_; ++i) {
      u(i, 0) = v(i, 0) = 0.0;
      u(i, ny_ - 1) = v(i, ny_ - 1) = 0.0;
    }
    for (int j = 1; j < ny_ - 1; ++j) {
      u(0, j) = 1.0;
      v(0, j) = 0.0;
      u(nx_ - 1, j) = u(nx_ - 2, j);
      v(nx_ - 1, j) = v(nx_ - 2, j);
    }
  }

  void predictor(const FlowState& s, Field2D& us, Field2D& vs) const {
    us = s.ux;
    vs = s.uy;
    const auto& u = s.ux;
    const auto& v = s.uy;
    const auto& p = s.p;
    for (int j = 1; j < ny_ - 1; ++j)
      for (int i = 1; i < nx_ - 1; ++i) {
        auto fx = [&](const Field2D& q, int a) {  // flux of q through the face right of column a
          return 0.5 * (u(a, j) + u(a + 1, j)) * 0.5 * (q(a, j) + q(a + 1, j));
        };
        auto fy = [&](const Field2D& q, int b) {
          return 0.5 * (v(i, b) + v(i, b + 1)) * 0.5 * (q(i, b) + q(i, b + 1));
        };
        const double adv_u = (fx(u, i) - fx(u, i - 1) + fy(u, j) - fy(u, j - 1)) / h_;
        const double adv_v = (fx(v, i) - fx(v, i - 1) + fy(v, j) - fy(v, j - 1)) / h_;
        auto lap = [&](const Field2D& q) {
          return (q(i - 1, j) + q(i + 1, j) + q(i, j - 1) + q(i, j + 1) - 4 * q(i, j)) / (h_ * h_);
        };
        us(i, j) = u(i, j) + dt_ * (-adv_u - (p(i + 1, j) - p(i - 1, j)) / (2 * h_) + nu_ * lap(u));
        vs(i, j) = v(i, j) + dt_ * (-adv_v - (p(i, j + 1) - p(i, j - 1)) / (2 * h_) + nu_ * lap(v));
      }
    boundaries(us, vs);
  }

  double divergence(const Field2D& u, const Field2D& v, int i, int j) const {
    double dx, dy;
    if (i == 0) dx = (u(1, j) - u(0, j)) / h_;
    else if (i == nx_ - 1) dx = (u(i, j) - u(i - 1, j)) / h_;
    else dx = (u(i + 1, j) - u(i - 1, j)) / (2 * h_);
    if (j == 0) dy = (v(i, 1) - v(i, 0)) / h_;
    else if (j == ny_ - 1) dy = (v(i, j) - v(i, j - 1)) / h_;
    else dy = (v(i, j + 1) - v(i, j - 1)) / (2 * h_);
    return dx + dy;
  }

  void step(FlowState& s) const {
    Field2D us, vs;
    predictor(s, us, vs);
    Eigen::VectorXd pold(nx_ * ny_), rhs(nx_ * ny_);
    for (int k = 0; k < nx_ * ny_; ++k) pold[k] = s.p[k];
    const Eigen::VectorXd lp = lap_ * pold;
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        rhs[id(i, j)] = (divergence(us, vs, i, j) + dt_ * lp[id(i, j)]) / dt_;
    const Eigen::VectorXd pnew = lu_.solve(rhs);
    for (int j = 1; j < ny_ - 1; ++j)
      for (int i = 1; i < nx_ - 1; ++i) {
        const double dpx = (pnew[id(i + 1, j)] - pold[id(i + 1, j)]) - (pnew[id(i - 1, j)] - pold[id(i - 1, j)]);
        const double dpy = (pnew[id(i, j + 1)] - pold[id(i, j + 1)]) - (pnew[id(i, j - 1)] - pold[id(i, j - 1)]);
        us(i, j) -= dt_ * dpx / (2 * h_);
        vs(i, j) -= dt_ * dpy / (2 * h_);
      }
    s.ux = us;
    s.uy = vs;
    for (int k = 0; k < nx_ * ny_; ++k) s.p[k] = pnew[k];
    boundaries(s.ux, s.uy);
    s.t += dt_;
  }

 private:
  int nx_, ny_;
  double h_, nu_, dt_;
  Eigen::MatrixXd lap_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace qhd::test
