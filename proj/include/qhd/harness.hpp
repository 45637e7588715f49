#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhd/config.hpp"
#include "qhd/diagnostics.hpp"
#include "qhd/io.hpp"
#include "qhd/solver.hpp"

namespace qhd {

/// Full scale runs a config as written. Desk scale shortens T0 by time_factor
/// (or to an explicit t_final) and may replace hx; the factors travel with the
/// summary so desk numbers are never mistaken for full-scale reproductions.
struct Scale {
  enum class Kind { Full, Desk };
  Kind kind = Kind::Full;
  double time_factor = 0.25;
  double t_final = 0.0;  // > 0 overrides time_factor
  double hx = 0.0;       // > 0 replaces the config's hx
  double coarsen = 1.0;  // hx multiplier when hx is not given (1 or 2)

  static Scale full() { return {}; }
  static Scale desk(double time_factor = 0.25) { return {Kind::Desk, time_factor, 0.0, 0.0, 1.0}; }
};

std::string_view to_string(Scale::Kind k) noexcept;

/// The configuration actually run at the given scale. Averaging windows and the
/// spectrum start are rescaled with T0.
RunConfig apply_scale(const RunConfig& config, const Scale& scale);

enum class Regime { QuasiPeriodic, Decaying, Transitional, UnboundedGrowth, BlowUp };
std::string_view to_string(Regime r) noexcept;

struct RunSummary {
  std::string label;
  std::uint64_t config_hash = 0;  // of the effective configuration
  Scale scale;
  double re = 0.0;
  double tau = 0.0;
  double paper_t_final = 0.0;
  double paper_hx = 0.0;
  double t_final = 0.0;
  double hx = 0.0;
  int nx = 0;
  int ny = 0;
  Reattachment reattachment;
  Regime regime = Regime::QuasiPeriodic;
  /// Pooled probe fluctuation rms, last third over middle third.
  double amplitude_ratio = 0.0;
  AveragingWindow window;
  /// |Q_in - Q_out| / Q_in of the ux column fluxes averaged over every step of
  /// the final window.
  double mass_imbalance = 0.0;
  /// Same with the mass flux ux - wx, sampled at the probe interval.
  double qhd_mass_imbalance = 0.0;
  /// Largest instantaneous imbalance among recorded frames of the final window.
  double mass_imbalance_max = 0.0;
  std::optional<double> blowup_time;
  std::int64_t steps = 0;
  std::int64_t guard_violations = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
  std::string error;  // nonempty when the run could not be executed

  /// L_s/h, or nullopt for unbounded recirculation or a failed run.
  std::optional<double> length_over_h() const;
  std::string to_json() const;
};

struct RunResult {
  RunSummary summary;
  std::vector<ProbeSeries> probes;
  std::vector<AveragedField> averages;  // one per window, in config order
};

/// Regime from the probe histories and the final averaged reattachment.
Regime classify_regime(std::span<const ProbeSeries> probes, double t_final,
                       const Reattachment& reattachment, const RunConfig& config,
                       double* amplitude_ratio = nullptr);

/// Paper Tables 1 to 3, in order: 6 rows at Re 4667, 2 at Re 4012, 3 at Re 1667.
std::vector<RunConfig> table_configs();

/// Runs one configuration. When out_dir is nonempty the run directory gets
/// config.cfg, summary.json, probes/*.csv, spectra/*.csv, fields/*.snap
/// (if write_fields) and one avg_<t1>_<t2>.snap per window.
RunResult execute(const RunConfig& config, const Scale& scale,
                  const std::filesystem::path& out_dir = {});

struct SweepRow {
  double tau = 0.0;
  RunSummary summary;
};

/// One independent run per tau; failures are recorded in the row's summary and
/// the sweep continues. Up to `workers` runs execute concurrently.
std::vector<SweepRow> tau_sweep(const RunConfig& base, std::span<const double> taus,
                                const Scale& scale, const std::filesystem::path& out_dir = {},
                                int workers = 1);

/// Columns label,tau,re,hx,nx,ny,T0,scale,Ls_over_h,regime,amplitude_ratio,mass_imbalance,wall_seconds.
CsvTable summary_table(std::span<const RunSummary> rows);

}  // namespace qhd
