#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "qhd/diagnostics.hpp"
#include "qhd/grid.hpp"
#include "qhd/pressure.hpp"
#include "qhd/solver.hpp"

namespace qhd {

struct AveragingWindow {
  double t1 = 0.0;
  double t2 = 0.0;
  friend bool operator==(const AveragingWindow&, const AveragingWindow&) = default;
};

/// Complete dimensionless description of one numerical experiment.
struct RunConfig {
  std::string label = "run";
  double re = 0.0;
  double tau = 0.0;
  double hx = 0.0;
  StepGeometry geometry{};
  double dt = 1e-4;
  double t_final = 0.0;  // T0
  double field_interval = 0.5;
  double probe_interval = 0.05;
  std::vector<Point> probes = default_probes();
  std::uint64_t seed = 1;
  double perturbation = 1e-3;
  /// Empty means a single window [T0/2, T0].
  std::vector<AveragingWindow> windows;
  /// Start of the spectral analysis window; negative means T0/3.
  double spectrum_start = -1.0;
  double upwind = 0.0;
  InletProfile inlet = InletProfile::Flat;
  PressureSolverKind pressure = PressureSolverKind::Auto;
  double sound_speed = 340.0 / 1.4;
  bool write_fields = true;
  /// Regime thresholds: quasi-periodic when the late/middle amplitude ratio is
  /// within this factor of 1, decaying below decay_ratio.
  double quasi_periodic_factor = 2.0;
  double decay_ratio = 0.1;

  static std::vector<Point> default_probes() { return {{1, 0.75}, {2, 0.75}, {3, 0.75}, {4, 0.75}}; }

  SolverParams solver_params() const;
  /// Configured windows, or the default final half of the run.
  std::vector<AveragingWindow> effective_windows() const;
  double effective_spectrum_start() const { return spectrum_start < 0.0 ? t_final / 3.0 : spectrum_start; }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

using WarningSink = std::function<void(std::string_view)>;

/// Writes "warning: <text>" lines to stderr.
void stderr_warning_sink(std::string_view text);

/// Parses the key = value configuration format.
///
/// Optional [section] headers group keys (run, geometry, physics, numerics,
/// recording, probes, regime); a key under the wrong section, an unknown key,
/// a missing required key (re, tau, h_over_H, L, hx, T0) or a malformed value
/// is a ConfigError naming the line. Soft tau heuristics go to `warn`.
RunConfig parse_config(std::string_view text, const WarningSink& warn = stderr_warning_sink);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64 of the canonical text.
std::uint64_t config_hash(const RunConfig& config);

std::string hash_hex(std::uint64_t hash);

/// Checks a configuration without parsing: geometry, grid divisibility, step
/// alignment of recording intervals, windows. Returns soft warnings.
std::vector<std::string> validate_config(const RunConfig& config);

}  // namespace qhd
