#include "qhd/pressure.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "qhd/errors.hpp"

namespace qhd {

std::string_view to_string(PressureSolverKind kind) noexcept {
  switch (kind) {
    case PressureSolverKind::Auto: return "auto";
    case PressureSolverKind::Spectral: return "spectral";
    case PressureSolverKind::RedBlackSor: return "sor";
  }
  return "?";
}

PressureSolverKind parse_pressure_solver_kind(std::string_view text) {
  if (text == "auto") return PressureSolverKind::Auto;
  if (text == "spectral") return PressureSolverKind::Spectral;
  if (text == "sor") return PressureSolverKind::RedBlackSor;
  throw ConfigError("unknown pressure solver '" + std::string(text) + "'");
}

namespace {

// Second difference along one direction with mirror ghosts. Returns the
// neighbour sum and the diagonal weight so SOR can reuse it.
struct Stencil1D {
  double sum;
  double diag;
};

inline Stencil1D stencil_x(const UniformGrid& g, const Field2D& p, int i, int j) {
  const bool l = g.active(i - 1, j), r = g.active(i + 1, j);
  // zero Dirichlet ghost one step beyond the outlet column
  if (i == g.nx() - 1) return {l ? p(i - 1, j) : 0.0, 2.0};
  if (l && r) return {p(i - 1, j) + p(i + 1, j), 2.0};
  if (r) return {2.0 * p(i + 1, j), 2.0};
  if (l) return {2.0 * p(i - 1, j), 2.0};
  return {0.0, 0.0};
}

inline Stencil1D stencil_y(const UniformGrid& g, const Field2D& p, int i, int j) {
  const bool d = g.active(i, j - 1), u = g.active(i, j + 1);
  if (d && u) return {p(i, j - 1) + p(i, j + 1), 2.0};
  if (u) return {2.0 * p(i, j + 1), 2.0};
  if (d) return {2.0 * p(i, j - 1), 2.0};
  return {0.0, 0.0};
}

double max_abs(const Field2D& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

// The FFTW planner is not reentrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class SpectralSolver final : public PressureSolver {
 public:
  explicit SpectralSolver(const UniformGrid& grid) : nx_(grid.nx()), ny_(grid.ny()) {
    if (!grid.rectangular())
      throw ConfigError("spectral pressure solver requires a rectangular flow domain");
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    buf_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    const int len[1] = {nx_};
    const fftw_r2r_kind fwd[1] = {FFTW_REDFT01};
    const fftw_r2r_kind inv[1] = {FFTW_REDFT10};
    const std::lock_guard lock(planner_mutex());
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence rounding, reproducible.
    forward_ = fftw_plan_many_r2r(1, len, ny_, buf_, nullptr, 1, nx_, buf_, nullptr, 1, nx_, fwd,
                                  FFTW_ESTIMATE);
    inverse_ = fftw_plan_many_r2r(1, len, ny_, buf_, nullptr, 1, nx_, buf_, nullptr, 1, nx_, inv,
                                  FFTW_ESTIMATE);
    factorize(grid.hx());
  }

  ~SpectralSolver() override {
    const std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(buf_);
  }

  SpectralSolver(const SpectralSolver&) = delete;
  SpectralSolver& operator=(const SpectralSolver&) = delete;

  std::string_view name() const noexcept override { return "spectral"; }

  void solve(const Field2D& rhs, Field2D& p) override {
    const std::size_t nx = nx_;
    std::copy(rhs.values().begin(), rhs.values().end(), buf_);
    fftw_execute(forward_);
    // Along-channel mode k lives at column k; solve the cross-channel
    // tridiagonal systems for all modes at once, row by row.
    const double off = inv_h2_;
    for (int k = 0; k < nx_; ++k) buf_[k] *= inv_denom_[k];
    for (int j = 1; j < ny_; ++j) {
      const double a = j == ny_ - 1 ? 2.0 * off : off;
      double* d = buf_ + j * nx;
      const double* dm = d - nx;
      const double* id = inv_denom_.data() + j * nx;
      for (std::size_t k = 0; k < nx; ++k) d[k] = (d[k] - a * dm[k]) * id[k];
    }
    for (int j = ny_ - 2; j >= 0; --j) {
      double* d = buf_ + j * nx;
      const double* dp = d + nx;
      const double* cp = cprime_.data() + j * nx;
      for (std::size_t k = 0; k < nx; ++k) d[k] -= cp[k] * dp[k];
    }
    fftw_execute(inverse_);
    const double scale = 1.0 / (2.0 * nx_);
    for (std::size_t q = 0; q < p.size(); ++q) p[q] = buf_[q] * scale;
    last_iterations_ = 1;
    last_residual_ = 0.0;
  }

 private:
  void factorize(double h) {
    const std::size_t nx = nx_;
    inv_h2_ = 1.0 / (h * h);
    const double off = inv_h2_;
    cprime_.assign(nx * ny_, 0.0);
    inv_denom_.assign(nx * ny_, 0.0);
    for (int k = 0; k < nx_; ++k) {
      const double lambda = (2.0 * std::cos(std::numbers::pi * (k + 0.5) / nx_) - 2.0) * off;
      const double b = -2.0 * off + lambda;
      // rows 0 and ny-1 carry the mirrored neighbour twice
      double prev_c = 0.0;
      for (int j = 0; j < ny_; ++j) {
        const double a = j == 0 ? 0.0 : (j == ny_ - 1 ? 2.0 * off : off);
        const double c = j == 0 ? 2.0 * off : off;
        const double denom = b - a * prev_c;
        inv_denom_[j * nx + k] = 1.0 / denom;
        prev_c = c / denom;
        cprime_[j * nx + k] = prev_c;
      }
    }
  }

  int nx_;
  int ny_;
  double inv_h2_ = 0.0;
  double* buf_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
  std::vector<double> cprime_;
  std::vector<double> inv_denom_;
};

class SorSolver final : public PressureSolver {
 public:
  SorSolver(const UniformGrid& grid, SorOptions opt) : grid_(grid), opt_(opt) {}

  std::string_view name() const noexcept override { return "sor"; }

  void solve(const Field2D& rhs, Field2D& p) override {
    const double scale = std::max(1.0, max_abs(rhs));
    const double h2 = grid_.hx() * grid_.hx();
    const double omega = opt_.omega;
    const int nx = grid_.nx(), ny = grid_.ny();
    double residual = laplacian_residual(grid_, rhs, p);
    int it = 0;
    while (residual > opt_.tolerance * scale) {
      if (it >= opt_.max_iterations) {
        last_iterations_ = it;
        last_residual_ = residual;
        std::ostringstream os;
        os << "SOR pressure solve did not converge in " << it
           << " iterations, residual=" << residual;
        throw SolverError(os.str(), residual);
      }
      for (int sweep = 0; sweep < opt_.check_every; ++sweep, ++it) {
        for (int color = 0; color < 2; ++color) {
          for (int j = 0; j < ny; ++j) {
            for (int i = (j + color) & 1; i < nx; i += 2) {
              if (!grid_.active(i, j)) continue;
              const auto sx = stencil_x(grid_, p, i, j);
              const auto sy = stencil_y(grid_, p, i, j);
              const double diag = sx.diag + sy.diag;
              if (diag == 0.0) continue;
              const double gs = (sx.sum + sy.sum - h2 * rhs(i, j)) / diag;
              p(i, j) += omega * (gs - p(i, j));
            }
          }
        }
      }
      residual = laplacian_residual(grid_, rhs, p);
    }
    last_iterations_ = it;
    last_residual_ = residual;
  }

 private:
  UniformGrid grid_;
  SorOptions opt_;
};

}  // namespace

std::unique_ptr<PressureSolver> make_spectral_solver(const UniformGrid& grid) {
  return std::make_unique<SpectralSolver>(grid);
}

std::unique_ptr<PressureSolver> make_sor_solver(const UniformGrid& grid, SorOptions options) {
  return std::make_unique<SorSolver>(grid, options);
}

std::unique_ptr<PressureSolver> make_pressure_solver(const UniformGrid& grid,
                                                     PressureSolverKind kind,
                                                     SorOptions options) {
  switch (kind) {
    case PressureSolverKind::Spectral: return make_spectral_solver(grid);
    case PressureSolverKind::RedBlackSor: return make_sor_solver(grid, options);
    case PressureSolverKind::Auto:
      return grid.rectangular() ? make_spectral_solver(grid) : make_sor_solver(grid, options);
  }
  return nullptr;
}

double laplacian_at(const UniformGrid& g, const Field2D& p, int i, int j) noexcept {
  const double h2 = g.hx() * g.hx();
  const auto sx = stencil_x(g, p, i, j);
  const auto sy = stencil_y(g, p, i, j);
  return (sx.sum + sy.sum - (sx.diag + sy.diag) * p(i, j)) / h2;
}

void apply_laplacian(const UniformGrid& grid, const Field2D& p, Field2D& out) {
  out = Field2D(grid.nx(), grid.ny());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i)
      if (grid.active(i, j)) out(i, j) = laplacian_at(grid, p, i, j);
}

double laplacian_residual(const UniformGrid& grid, const Field2D& rhs, const Field2D& p) {
  double r = 0.0;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i)
      if (grid.active(i, j)) r = std::max(r, std::abs(laplacian_at(grid, p, i, j) - rhs(i, j)));
  return r;
}

}  // namespace qhd
