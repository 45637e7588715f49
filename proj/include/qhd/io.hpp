#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qhd/diagnostics.hpp"
#include "qhd/field.hpp"
#include "qhd/grid.hpp"
#include "qhd/spectra.hpp"

namespace qhd {

enum class SnapshotKind : std::uint32_t { Instantaneous = 0, Averaged = 1 };

/// Fixed 88-byte little-endian header followed by ux, uy, p (row-major f64).
///
///   0  char[8] "QHDSNAP\0"     40 f64 L
///   8  u32 version (1)         48 f64 step_x
///  12  u32 kind                56 u32 side (0 bottom, 1 top)
///  16  u32 nx                  60 u32 n_frames
///  20  u32 ny                  64 f64 t      (window end when averaged)
///  24  f64 hx                  72 f64 t_begin
///  32  f64 h_over_H            80 u64 config_hash
struct SnapshotHeader {
  static constexpr std::uint32_t current_version = 1;
  static constexpr std::size_t size = 88;

  std::uint32_t version = current_version;
  SnapshotKind kind = SnapshotKind::Instantaneous;
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  StepGeometry geometry{};
  int n_frames = 1;
  double t = 0.0;
  double t_begin = 0.0;
  std::uint64_t config_hash = 0;
};

struct Snapshot {
  SnapshotHeader header;
  Field2D ux, uy, p;

  /// Grid rebuilt from the header geometry and hx.
  UniformGrid grid() const;
  FlowState state() const;
  AveragedField averaged() const;
};

Snapshot make_snapshot(const FlowState& s, const UniformGrid& grid, std::uint64_t config_hash);
Snapshot make_snapshot(const AveragedField& avg, const UniformGrid& grid, std::uint64_t config_hash);

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);
/// Throws FormatError on bad magic, version, or a payload length that does not
/// match the header dimensions.
Snapshot read_snapshot(const std::filesystem::path& path);

/// Snapshot files in a directory, sorted by header time.
std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& dir);

/// %.17g rendering used by every CSV writer.
std::string format_double(double v);

/// A rectangular CSV table.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // FormatError when absent
  double number(std::size_t row, std::size_t col) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Throws FormatError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Columns t,x,y,ux,uy.
CsvTable probe_table(const ProbeSeries& series);
ProbeSeries probe_from_table(const CsvTable& table);
/// Columns k,E,reliable.
CsvTable spectrum_table(const Spectrum& s);
/// Columns i,j,x,y,<name> over every node.
CsvTable field_table(const UniformGrid& grid, const Field2D& f, const std::string& name);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace qhd
