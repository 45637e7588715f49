#include "qhd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "json.hpp"
#include "qhd/errors.hpp"
#include "qhd/io.hpp"
#include "qhd/spectra.hpp"

namespace qhd {

std::string_view to_string(Scale::Kind k) noexcept { return k == Scale::Kind::Full ? "full" : "desk"; }

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::QuasiPeriodic: return "quasi-periodic";
    case Regime::Decaying: return "decaying";
    case Regime::Transitional: return "transitional";
    case Regime::UnboundedGrowth: return "unbounded-growth";
    case Regime::BlowUp: return "blow-up";
  }
  return "?";
}

RunConfig apply_scale(const RunConfig& config, const Scale& scale) {
  if (scale.kind == Scale::Kind::Full) return config;
  RunConfig c = config;
  c.t_final = scale.t_final > 0.0 ? scale.t_final : config.t_final * scale.time_factor;
  if (scale.hx > 0.0) c.hx = scale.hx;
  else if (scale.coarsen != 1.0) c.hx = build_grid(config.geometry, config.hx).hx() * scale.coarsen;
  const double r = c.t_final / config.t_final;
  for (auto& w : c.windows) w = {w.t1 * r, w.t2 * r};
  if (c.spectrum_start >= 0.0) c.spectrum_start *= r;
  return c;
}

std::optional<double> RunSummary::length_over_h() const {
  if (!error.empty() || regime == Regime::BlowUp || reattachment.unbounded()) return std::nullopt;
  return reattachment.length_over_h;
}

std::string RunSummary::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["config_hash"] = hash_hex(config_hash);
  j["re"] = re;
  j["tau"] = tau;
  j["scale"] = {{"kind", to_string(scale.kind)},
                {"time_factor", scale.kind == Scale::Kind::Desk && scale.t_final <= 0.0 ? scale.time_factor : 1.0},
                {"T0", t_final},
                {"hx", hx},
                {"paper_T0", paper_t_final},
                {"paper_hx", paper_hx}};
  j["grid"] = {{"nx", nx}, {"ny", ny}};
  if (const auto l = length_over_h()) j["L_s_over_h"] = *l;
  else if (!error.empty() || regime == Regime::BlowUp) j["L_s_over_h"] = nullptr;
  else j["L_s_over_h"] = "unbounded";
  j["regime"] = to_string(regime);
  j["amplitude_ratio"] = amplitude_ratio;
  j["window"] = {window.t1, window.t2};
  j["mass_imbalance"] = mass_imbalance;
  j["mass_imbalance_max"] = mass_imbalance_max;
  j["qhd_mass_imbalance"] = qhd_mass_imbalance;
  j["blowup_time"] = blowup_time ? nlohmann::ordered_json(*blowup_time) : nlohmann::ordered_json(nullptr);
  j["steps"] = steps;
  j["guard_violations"] = guard_violations;
  j["wall_seconds"] = wall_seconds;
  j["warnings"] = warnings;
  if (!error.empty()) j["error"] = error;
  return j.dump(2) + "\n";
}

namespace {

double pooled_variance(std::span<const ProbeSeries> probes, double t0, double t1) {
  double total = 0.0;
  for (const auto& p : probes) {
    for (const Component c : {Component::Ux, Component::Uy}) {
      double sum = 0.0, sq = 0.0;
      int n = 0;
      for (const auto& s : p.samples) {
        if (s.t < t0 || s.t > t1) continue;
        const double v = c == Component::Ux ? s.ux : s.uy;
        sum += v;
        sq += v * v;
        ++n;
      }
      if (n < 2) continue;
      const double mean = sum / n;
      total += std::max(0.0, sq / n - mean * mean);
    }
  }
  return total;
}

}  // namespace

Regime classify_regime(std::span<const ProbeSeries> probes, double t_final,
                       const Reattachment& reattachment, const RunConfig& config,
                       double* amplitude_ratio) {
  const double third = t_final / 3.0;
  const double eps = 1e-9 * t_final;
  const double mid = pooled_variance(probes, third - eps, 2.0 * third - eps);
  const double last = pooled_variance(probes, 2.0 * third - eps, t_final + eps);
  double ratio;
  if (mid > 0.0) ratio = std::sqrt(last / mid);
  else ratio = last > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  if (amplitude_ratio) *amplitude_ratio = ratio;

  if (reattachment.unbounded()) return Regime::UnboundedGrowth;
  if (ratio < config.decay_ratio) return Regime::Decaying;
  const double f = config.quasi_periodic_factor;
  if (ratio >= 1.0 / f && ratio <= f) return Regime::QuasiPeriodic;
  return Regime::Transitional;
}

std::vector<RunConfig> table_configs() {
  struct Row {
    const char* label;
    double re, h_over_H, tau, hx, L, t0, dt;
  };
  // hx = 0.00833 stands for H/120; build_grid snaps it to the exact divisor.
  static constexpr Row rows[] = {
      {"table1_run1", 4667, 0.5, 0.0001, 0.0125, 5, 20, 1e-5},
      {"table1_run2", 4667, 0.5, 0.001, 0.00833, 5, 40, 1e-4},
      {"table1_run3", 4667, 0.5, 0.001, 0.0125, 5, 20, 1e-4},
      {"table1_run4", 4667, 0.5, 0.05, 0.00833, 5, 120, 1e-4},
      {"table1_run5", 4667, 0.5, 0.05, 0.0125, 5, 120, 1e-4},
      {"table1_run6", 4667, 0.5, 0.1, 0.0125, 7.5, 40, 1e-4},
      {"table2_run1", 4012, 0.44, 0.001, 0.0125, 5, 20, 1e-4},
      {"table2_run2", 4012, 0.44, 0.05, 0.00833, 5, 200, 1e-4},
      {"table3_run1", 1667, 0.33, 0.001, 0.0125, 5, 20, 1e-4},
      {"table3_run2", 1667, 0.33, 0.02, 0.0125, 6, 160, 1e-4},
      {"table3_run3", 1667, 0.33, 0.05, 0.0125, 6, 60, 1e-4},
  };
  std::vector<RunConfig> out;
  for (const auto& r : rows) {
    RunConfig c;
    c.label = r.label;
    c.re = r.re;
    c.tau = r.tau;
    c.hx = r.hx;
    c.geometry.step_height_ratio = r.h_over_H;
    c.geometry.channel_length = r.L;
    c.t_final = r.t0;
    c.dt = r.dt;
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::string window_name(const AveragingWindow& w) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "avg_%g_%g.snap", w.t1, w.t2);
  return buf;
}

std::vector<double> even_length(std::vector<double> v) {
  if (v.size() % 2 == 1) v.pop_back();
  return v;
}

void write_spectra(const std::filesystem::path& dir, const std::vector<ProbeSeries>& probes,
                   double t_start) {
  for (std::size_t n = 0; n < probes.size(); ++n) {
    for (const Component c : {Component::Ux, Component::Uy}) {
      const auto values = even_length(probes[n].component(c, t_start));
      if (values.size() < 8) continue;
      char name[64];
      std::snprintf(name, sizeof name, "probe%zu_%s.csv", n + 1, std::string(to_string(c)).c_str());
      write_csv(dir / name, spectrum_table(energy_spectrum(values)));
    }
  }
}

}  // namespace

RunResult execute(const RunConfig& config, const Scale& scale, const std::filesystem::path& out_dir) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunResult res;
  RunSummary& sum = res.summary;
  const RunConfig cfg = apply_scale(config, scale);
  sum.label = cfg.label;
  sum.config_hash = config_hash(cfg);
  sum.scale = scale;
  sum.re = cfg.re;
  sum.tau = cfg.tau;
  sum.paper_t_final = config.t_final;
  sum.paper_hx = config.hx;
  sum.t_final = cfg.t_final;
  sum.hx = cfg.hx;
  const bool files = !out_dir.empty();

  try {
    validate_config(cfg);
    const UniformGrid grid = build_grid(cfg.geometry, cfg.hx);
    sum.nx = grid.nx();
    sum.ny = grid.ny();
    sum.hx = grid.hx();
    QhdSolver solver(grid, cfg.solver_params());
    sum.warnings = solver.warnings();
    if (files) {
      std::filesystem::create_directories(out_dir);
      write_text(out_dir / "config.cfg", serialize_config(cfg));
    }

    FlowState st = initial_state(solver, cfg.seed, cfg.perturbation);
    ProbeRecorder recorder(grid, cfg.probes, cfg.probe_interval, cfg.dt);
    const auto windows = cfg.effective_windows();
    std::size_t final_w = 0;
    for (std::size_t w = 1; w < windows.size(); ++w)
      if (windows[w].t2 > windows[final_w].t2 ||
          (windows[w].t2 == windows[final_w].t2 && windows[w].t1 < windows[final_w].t1))
        final_w = w;
    sum.window = windows[final_w];
    std::vector<AverageAccumulator> acc(windows.size(), AverageAccumulator(grid.nx(), grid.ny()));

    const std::int64_t field_stride = std::llround(cfg.field_interval / cfg.dt);
    const std::int64_t total = std::llround(cfg.t_final / cfg.dt);
    const double eps = 0.25 * cfg.dt;

    auto on_frame = [&](const FlowState& s) {
      for (std::size_t w = 0; w < windows.size(); ++w) {
        if (s.t < windows[w].t1 - eps || s.t > windows[w].t2 + eps) continue;
        acc[w].add(s);
        if (w == final_w)
          sum.mass_imbalance_max =
              std::max(sum.mass_imbalance_max, solver.mass_balance(s).relative_imbalance());
      }
      if (files && cfg.write_fields) {
        char name[64];
        std::snprintf(name, sizeof name, "snap_%010lld.snap", static_cast<long long>(s.step));
        write_snapshot(out_dir / "fields" / name, make_snapshot(s, grid, sum.config_hash));
      }
    };

    const std::int64_t probe_stride = std::llround(cfg.probe_interval / cfg.dt);
    MassBalance flux, qhd_flux;
    std::int64_t flux_samples = 0, qhd_samples = 0;
    auto on_step = [&](const FlowState& s) {
      if (s.t < sum.window.t1 - eps || s.t > sum.window.t2 + eps) return;
      flux.inlet_flux += solver.column_flux(s.ux, 0);
      flux.outlet_flux += solver.column_flux(s.ux, grid.nx() - 1);
      ++flux_samples;
      if (s.step % probe_stride != 0) return;
      Field2D j = s.ux;
      const RegularizingVelocity w = solver.compute_w(s);
      for (std::size_t k = 0; k < j.size(); ++k) j[k] -= w.wx[k];
      qhd_flux.inlet_flux += solver.column_flux(j, 0);
      qhd_flux.outlet_flux += solver.column_flux(j, grid.nx() - 1);
      ++qhd_samples;
    };

    recorder.observe(st);
    on_frame(st);
    on_step(st);
    try {
      while (st.step < total) {
        solver.advance(st);
        sum.steps = st.step;
        recorder.observe(st);
        on_step(st);
        if (st.step % field_stride == 0) on_frame(st);
      }
    } catch (const BlowUpError& e) {
      sum.regime = Regime::BlowUp;
      sum.blowup_time = e.time();
    }
    sum.guard_violations = solver.last_step().guard_violations;
    res.probes = recorder.series();

    if (!sum.blowup_time) {
      for (std::size_t w = 0; w < windows.size(); ++w) {
        AveragedField avg = acc[w].result();
        avg.psi = stream_function(avg, grid);
        if (files) write_snapshot(out_dir / window_name(windows[w]), make_snapshot(avg, grid, sum.config_hash));
        res.averages.push_back(std::move(avg));
      }
      const AveragedField& fin = res.averages[final_w];
      if (flux_samples > 0) sum.mass_imbalance = flux.relative_imbalance();
      if (qhd_samples > 0) sum.qhd_mass_imbalance = qhd_flux.relative_imbalance();
      sum.reattachment = reattachment_length(fin, grid);
      sum.regime = classify_regime(res.probes, cfg.t_final, sum.reattachment, cfg, &sum.amplitude_ratio);
    } else {
      sum.reattachment = {Reattachment::Kind::Unbounded, std::nan(""), std::nan("")};
      classify_regime(res.probes, st.t, sum.reattachment, cfg, &sum.amplitude_ratio);
    }

    if (files) {
      for (std::size_t n = 0; n < res.probes.size(); ++n) {
        char name[32];
        std::snprintf(name, sizeof name, "probe%zu.csv", n + 1);
        write_csv(out_dir / "probes" / name, probe_table(res.probes[n]));
      }
      write_spectra(out_dir / "spectra", res.probes, cfg.effective_spectrum_start());
    }
  } catch (const std::exception& e) {
    sum.error = e.what();
  }
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  if (files && std::filesystem::exists(out_dir)) write_text(out_dir / "summary.json", sum.to_json());
  return res;
}

std::vector<SweepRow> tau_sweep(const RunConfig& base, std::span<const double> taus,
                                const Scale& scale, const std::filesystem::path& out_dir,
                                int workers) {
  if (taus.empty()) throw UsageError("tau_sweep: empty tau list");
  std::vector<SweepRow> rows(taus.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t n; (n = next.fetch_add(1)) < taus.size();) {
      RunConfig c = base;
      c.tau = taus[n];
      char suffix[48];
      std::snprintf(suffix, sizeof suffix, "_%02zu_tau%g", n, taus[n]);
      c.label = base.label + suffix;
      rows[n].tau = taus[n];
      rows[n].summary = execute(c, scale, out_dir.empty() ? out_dir : out_dir / c.label).summary;
    }
  };
  const int n_threads = std::clamp(workers, 1, static_cast<int>(taus.size()));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  return rows;
}

CsvTable summary_table(std::span<const RunSummary> rows) {
  CsvTable t;
  t.header = {"label", "re", "tau", "hx", "nx", "ny", "T0", "scale", "Ls_over_h", "regime",
              "amplitude_ratio", "mass_imbalance", "wall_seconds"};
  for (const auto& s : rows) {
    const auto l = s.length_over_h();
    std::string ls = l ? format_double(*l) : (s.reattachment.unbounded() && s.error.empty() && !s.blowup_time ? "unbounded" : "");
    t.rows.push_back({s.label, format_double(s.re), format_double(s.tau), format_double(s.hx),
                      std::to_string(s.nx), std::to_string(s.ny), format_double(s.t_final),
                      std::string(to_string(s.scale.kind)), ls,
                      s.error.empty() ? std::string(to_string(s.regime)) : "error",
                      format_double(s.amplitude_ratio), format_double(s.mass_imbalance),
                      format_double(s.wall_seconds)});
  }
  return t;
}

}  // namespace qhd
