// Command-line front end: simulation runs and offline post-processing.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qhd/config.hpp"
#include "qhd/diagnostics.hpp"
#include "qhd/errors.hpp"
#include "qhd/harness.hpp"
#include "qhd/io.hpp"
#include "qhd/spectra.hpp"

namespace fs = std::filesystem;
using namespace qhd;

namespace {

fs::path output_root() {
  const char* env = std::getenv("QHD_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("qhd_output");
}

struct ScaleFlags {
  bool desk = false;
  double time_factor = 0.25;
  double t_final = 0.0;
  double hx = 0.0;
  bool coarsen = false;

  void add_to(CLI::App* cmd) {
    cmd->add_flag("--desk", desk, "Desk scale: shortened T0, optionally coarser grid");
    cmd->add_option("--time-factor", time_factor, "Desk T0 multiplier")->check(CLI::PositiveNumber);
    cmd->add_option("--t-final", t_final, "Desk T0 override")->check(CLI::PositiveNumber);
    cmd->add_option("--hx", hx, "Desk grid step override")->check(CLI::PositiveNumber);
    cmd->add_flag("--coarsen", coarsen, "Desk scale doubles hx");
  }
  Scale scale() const {
    if (!desk) {
      if (t_final > 0.0 || hx > 0.0 || coarsen)
        throw UsageError("--t-final, --hx and --coarsen require --desk");
      return Scale::full();
    }
    Scale s = Scale::desk(time_factor);
    s.t_final = t_final;
    s.hx = hx;
    s.coarsen = coarsen ? 2.0 : 1.0;
    return s;
  }
};

/// Snapshots in dir with t in [from, to] on the grid from + k * every.
std::vector<Snapshot> select_snapshots(const fs::path& dir, double from, double to, double every) {
  if (!(to > from)) throw UsageError("--to must exceed --from");
  std::vector<Snapshot> out;
  for (const auto& path : list_snapshots(dir)) {
    Snapshot s = read_snapshot(path);
    const double t = s.header.t;
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    if (t < from - tol || t > to + tol) continue;
    if (every > 0.0) {
      const double k = (t - from) / every;
      if (std::abs(k - std::round(k)) * every > tol) continue;
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw UsageError("no snapshots in " + dir.string() + " within the requested window");
  return out;
}

std::vector<Point> parse_points(const std::string& text) {
  std::vector<Point> pts;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(';', start);
    if (end == std::string::npos) end = text.size();
    const std::string part = text.substr(start, end - start);
    start = end + 1;
    if (part.find_first_not_of(" \t") == std::string::npos) continue;
    double x = 0, y = 0;
    char extra = 0;
    if (std::sscanf(part.c_str(), " %lf , %lf %c", &x, &y, &extra) != 2)
      throw UsageError("seed must be x,y: '" + part + "'");
    pts.push_back({x, y});
  }
  if (pts.empty()) throw UsageError("no seeds given");
  return pts;
}

void emit(const CsvTable& table, const std::string& out) {
  if (!out.empty()) {
    write_csv(out, table);
    return;
  }
  for (std::size_t c = 0; c < table.header.size(); ++c) std::cout << (c ? "," : "") << table.header[c];
  std::cout << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) std::cout << (c ? "," : "") << r[c];
    std::cout << '\n';
  }
}

int fail(std::string_view kind, std::string_view message, int code) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-hydrodynamic backward-facing step simulator"};
  app.require_subcommand(1);
  ScaleFlags scale_flags;

  // run
  auto* run = app.add_subcommand("run", "Execute one configuration");
  std::string run_cfg, run_out;
  run->add_option("config", run_cfg, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Run directory (default $QHD_OUTPUT_ROOT/<label>)");
  scale_flags.add_to(run);

  // tables
  auto* tables = app.add_subcommand("tables", "Execute the 11 paper table rows");
  std::vector<std::string> only;
  tables->add_option("--only", only, "Restrict to these labels")->delimiter(',');
  scale_flags.add_to(tables);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Independent runs over a list of tau");
  std::string sweep_cfg;
  std::vector<double> taus;
  int workers = 1;
  sweep->add_option("config", sweep_cfg, "Base configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--taus", taus, "Comma separated tau values")->required()->delimiter(',');
  sweep->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  scale_flags.add_to(sweep);

  // average
  auto* average = app.add_subcommand("average", "Trapezoidal time average of recorded snapshots");
  std::string avg_dir, avg_out;
  double avg_from = 0, avg_to = 0, avg_every = 0;
  average->add_option("--dir", avg_dir, "Directory of snapshots")->required();
  average->add_option("--from", avg_from, "Window start")->required();
  average->add_option("--to", avg_to, "Window end")->required();
  average->add_option("--every", avg_every, "Frame spacing (default: all frames)");
  average->add_option("--out", avg_out, "Averaged snapshot to write")->required();

  // streamfunc
  auto* streamfunc = app.add_subcommand("streamfunc", "Stream function of a snapshot");
  std::string sf_in, sf_out;
  streamfunc->add_option("--avg,--snap", sf_in, "Snapshot file")->required()->check(CLI::ExistingFile);
  streamfunc->add_option("--out", sf_out, "CSV output (default stdout)");

  // reattach
  auto* reattach = app.add_subcommand("reattach", "Reattachment length of a snapshot");
  std::string ra_in;
  reattach->add_option("--avg,--snap", ra_in, "Snapshot file")->required()->check(CLI::ExistingFile);

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Pulsation energy spectrum of a probe series");
  std::string sp_probe, sp_out, sp_comp = "ux";
  double sp_start = -1.0;
  spectrum->add_option("--probe", sp_probe, "Probe CSV")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--t-start", sp_start, "Analysis window start");
  spectrum->add_option("--component", sp_comp, "ux or uy");
  spectrum->add_option("--out", sp_out, "CSV output (default stdout)");
  bool sp_strict = false;
  spectrum->add_flag("--no-truncate", sp_strict, "Reject odd sample counts instead of dropping the last sample");

  // trace
  auto* trace = app.add_subcommand("trace", "Passive particle trajectories through recorded snapshots");
  std::string tr_dir, tr_seeds, tr_out;
  double tr_from = 0, tr_to = 0, tr_step = 1e-3;
  trace->add_option("--dir", tr_dir, "Directory of snapshots")->required();
  trace->add_option("--from", tr_from, "Start time")->required();
  trace->add_option("--to", tr_to, "End time")->required();
  trace->add_option("--seeds", tr_seeds, "Seed points 'x,y;x,y'")->required();
  trace->add_option("--step", tr_step, "Integration step")->check(CLI::PositiveNumber);
  trace->add_option("--out", tr_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*run) {
      const RunConfig cfg = load_config(run_cfg);
      const fs::path dir = run_out.empty() ? output_root() / cfg.label : fs::path(run_out);
      const RunResult r = execute(cfg, scale_flags.scale(), dir);
      std::cout << r.summary.to_json();
      if (!r.summary.error.empty()) return fail("run", r.summary.error, 4);
    } else if (*tables) {
      const Scale scale = scale_flags.scale();
      std::vector<RunSummary> rows;
      const fs::path root = output_root() / (scale.kind == Scale::Kind::Desk ? "tables_desk" : "tables_full");
      for (const auto& cfg : table_configs()) {
        if (!only.empty() && std::find(only.begin(), only.end(), cfg.label) == only.end()) continue;
        rows.push_back(execute(cfg, scale, root / cfg.label).summary);
        std::cerr << "done " << cfg.label << '\n';
      }
      if (rows.empty()) throw UsageError("--only matched no table row");
      write_csv(root / "summary.csv", summary_table(rows));
      emit(summary_table(rows), "");
    } else if (*sweep) {
      const RunConfig base = load_config(sweep_cfg);
      const fs::path root = output_root() / (base.label + "_sweep");
      const auto sweep_rows = tau_sweep(base, taus, scale_flags.scale(), root, workers);
      std::vector<RunSummary> rows;
      for (const auto& r : sweep_rows) rows.push_back(r.summary);
      write_csv(root / "summary.csv", summary_table(rows));
      emit(summary_table(rows), "");
    } else if (*average) {
      const auto snaps = select_snapshots(avg_dir, avg_from, avg_to, avg_every);
      AverageAccumulator acc(snaps.front().header.nx, snaps.front().header.ny);
      for (const auto& s : snaps) {
        if (s.header.nx != snaps.front().header.nx || s.header.ny != snaps.front().header.ny)
          throw FormatError("snapshots have different grids");
        acc.add(s.ux, s.uy, s.p, s.header.t);
      }
      const AveragedField avg = acc.result();
      const UniformGrid grid = snaps.front().grid();
      write_snapshot(avg_out, make_snapshot(avg, grid, snaps.front().header.config_hash));
      nlohmann::ordered_json j;
      j["out"] = avg_out;
      j["t1"] = avg.t1;
      j["t2"] = avg.t2;
      j["n_frames"] = avg.n_frames;
      std::cout << j.dump() << '\n';
    } else if (*streamfunc) {
      const Snapshot s = read_snapshot(sf_in);
      const UniformGrid grid = s.grid();
      emit(field_table(grid, stream_function(s.ux, grid), "psi"), sf_out);
    } else if (*reattach) {
      const Snapshot s = read_snapshot(ra_in);
      const UniformGrid grid = s.grid();
      const Reattachment r = reattachment_length(s.ux, grid);
      nlohmann::ordered_json j;
      j["file"] = ra_in;
      j["kind"] = r.kind == Reattachment::Kind::Unbounded ? "unbounded"
                  : r.kind == Reattachment::Kind::Attached ? "attached" : "bounded";
      if (r.unbounded()) j["L_s_over_h"] = "unbounded";
      else j["L_s_over_h"] = r.length_over_h;
      if (!r.unbounded()) j["x"] = r.x;
      std::cout << j.dump() << '\n';
    } else if (*spectrum) {
      ProbeSeries series = probe_from_table(read_csv(sp_probe));
      series.validate();
      auto values = series.component(parse_component(sp_comp), sp_start);
      if (!sp_strict && values.size() % 2 == 1) values.pop_back();
      emit(spectrum_table(energy_spectrum(values)), sp_out);
    } else if (*trace) {
      const auto snaps = select_snapshots(tr_dir, tr_from, tr_to, 0.0);
      std::vector<FlowState> states;
      for (const auto& s : snaps) states.push_back(s.state());
      const UniformGrid grid = snaps.front().grid();
      const auto seeds = parse_points(tr_seeds);
      const auto trajectories = trace_particles(states, grid, seeds, tr_step);
      CsvTable t;
      t.header = {"particle", "t", "x", "y", "stop"};
      for (std::size_t n = 0; n < trajectories.size(); ++n)
        for (const auto& p : trajectories[n].points)
          t.rows.push_back({std::to_string(n), format_double(p[0]), format_double(p[1]),
                            format_double(p[2]), std::string(to_string(trajectories[n].stop))});
      emit(t, tr_out);
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), 2);
  } catch (const FormatError& e) {
    return fail("format", e.what(), 3);
  } catch (const SolverError& e) {
    return fail("solver", e.what(), 4);
  } catch (const BlowUpError& e) {
    return fail("blow-up", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
