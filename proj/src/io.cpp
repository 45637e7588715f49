#include "qhd/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qhd/errors.hpp"

namespace qhd {

namespace {

constexpr char magic[8] = {'Q', 'H', 'D', 'S', 'N', 'A', 'P', '\0'};

template <class T>
void put(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t offset) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void put_field(std::string& buf, const Field2D& f) {
  if constexpr (std::endian::native == std::endian::little) {
    buf.append(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(double));
  } else {
    for (std::size_t k = 0; k < f.size(); ++k) put(buf, f[k]);
  }
}

void get_field(const std::string& buf, std::size_t offset, Field2D& f) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(f.data(), buf.data() + offset, f.size() * sizeof(double));
  } else {
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = get<double>(buf, offset + 8 * k);
  }
}

}  // namespace

UniformGrid Snapshot::grid() const {
  const UniformGrid g = build_grid(header.geometry, header.hx);
  if (g.nx() != header.nx || g.ny() != header.ny)
    throw FormatError("snapshot header dimensions do not match its geometry");
  return g;
}

FlowState Snapshot::state() const {
  FlowState s;
  s.ux = ux;
  s.uy = uy;
  s.p = p;
  s.t = header.t;
  return s;
}

AveragedField Snapshot::averaged() const {
  AveragedField a;
  a.t1 = header.t_begin;
  a.t2 = header.t;
  a.ux_av = ux;
  a.uy_av = uy;
  a.p_av = p;
  a.n_frames = header.n_frames;
  return a;
}

Snapshot make_snapshot(const FlowState& s, const UniformGrid& grid, std::uint64_t hash) {
  Snapshot snap;
  snap.header.kind = SnapshotKind::Instantaneous;
  snap.header.nx = grid.nx();
  snap.header.ny = grid.ny();
  snap.header.hx = grid.hx();
  snap.header.geometry = grid.geometry();
  snap.header.n_frames = 1;
  snap.header.t = s.t;
  snap.header.t_begin = s.t;
  snap.header.config_hash = hash;
  snap.ux = s.ux;
  snap.uy = s.uy;
  snap.p = s.p;
  return snap;
}

Snapshot make_snapshot(const AveragedField& avg, const UniformGrid& grid, std::uint64_t hash) {
  Snapshot snap;
  snap.header.kind = SnapshotKind::Averaged;
  snap.header.nx = grid.nx();
  snap.header.ny = grid.ny();
  snap.header.hx = grid.hx();
  snap.header.geometry = grid.geometry();
  snap.header.n_frames = avg.n_frames;
  snap.header.t = avg.t2;
  snap.header.t_begin = avg.t1;
  snap.header.config_hash = hash;
  snap.ux = avg.ux_av;
  snap.uy = avg.uy_av;
  snap.p = avg.p_av;
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  const auto& h = snap.header;
  const std::size_t n = static_cast<std::size_t>(h.nx) * h.ny;
  if (snap.ux.size() != n || snap.uy.size() != n || snap.p.size() != n)
    throw UsageError("write_snapshot: field sizes do not match header");
  std::string buf;
  buf.reserve(SnapshotHeader::size + 3 * n * sizeof(double));
  buf.append(magic, sizeof magic);
  put<std::uint32_t>(buf, h.version);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(h.kind));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(h.nx));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(h.ny));
  put<double>(buf, h.hx);
  put<double>(buf, h.geometry.step_height_ratio);
  put<double>(buf, h.geometry.channel_length);
  put<double>(buf, h.geometry.step_x);
  put<std::uint32_t>(buf, h.geometry.side == StepSide::Top ? 1u : 0u);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(h.n_frames));
  put<double>(buf, h.t);
  put<double>(buf, h.t_begin);
  put<std::uint64_t>(buf, h.config_hash);
  put_field(buf, snap.ux);
  put_field(buf, snap.uy);
  put_field(buf, snap.p);
  write_text(path, buf);
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  const std::string buf = read_text(path);
  const std::string where = path.string() + ": ";
  if (buf.size() < SnapshotHeader::size || std::memcmp(buf.data(), magic, sizeof magic) != 0)
    throw FormatError(where + "not a snapshot file");
  Snapshot snap;
  auto& h = snap.header;
  h.version = get<std::uint32_t>(buf, 8);
  if (h.version != SnapshotHeader::current_version)
    throw FormatError(where + "unsupported snapshot version " + std::to_string(h.version));
  const auto kind = get<std::uint32_t>(buf, 12);
  if (kind > 1) throw FormatError(where + "unknown snapshot kind");
  h.kind = static_cast<SnapshotKind>(kind);
  h.nx = static_cast<int>(get<std::uint32_t>(buf, 16));
  h.ny = static_cast<int>(get<std::uint32_t>(buf, 20));
  h.hx = get<double>(buf, 24);
  h.geometry.step_height_ratio = get<double>(buf, 32);
  h.geometry.channel_length = get<double>(buf, 40);
  h.geometry.step_x = get<double>(buf, 48);
  h.geometry.side = get<std::uint32_t>(buf, 56) == 1 ? StepSide::Top : StepSide::Bottom;
  h.n_frames = static_cast<int>(get<std::uint32_t>(buf, 60));
  h.t = get<double>(buf, 64);
  h.t_begin = get<double>(buf, 72);
  h.config_hash = get<std::uint64_t>(buf, 80);
  const std::size_t n = static_cast<std::size_t>(h.nx) * h.ny;
  if (h.nx <= 0 || h.ny <= 0 || buf.size() != SnapshotHeader::size + 3 * n * sizeof(double))
    throw FormatError(where + "payload length does not match header dimensions");
  snap.ux = Field2D(h.nx, h.ny);
  snap.uy = Field2D(h.nx, h.ny);
  snap.p = Field2D(h.nx, h.ny);
  const std::size_t bytes = n * sizeof(double);
  get_field(buf, SnapshotHeader::size, snap.ux);
  get_field(buf, SnapshotHeader::size + bytes, snap.uy);
  get_field(buf, SnapshotHeader::size + 2 * bytes, snap.p);
  return snap;
}

std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<std::pair<double, std::filesystem::path>> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".snap") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string head(SnapshotHeader::size, '\0');
    if (!in.read(head.data(), static_cast<std::streamsize>(head.size()))) continue;
    if (std::memcmp(head.data(), magic, sizeof magic) != 0) continue;
    found.emplace_back(get<double>(head, 64), entry.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<std::filesystem::path> out;
  for (auto& [t, p] : found) out.push_back(std::move(p));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("CSV has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows.at(row).at(col);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    // from_chars rejects "nan"/"inf" spellings from printf on some libstdc++ versions
    if (s == "nan" || s == "-nan") return std::nan("");
    throw FormatError("CSV cell is not a number: '" + s + "'");
  }
  return v;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    if (cells.size() != table.header.size()) throw UsageError("write_csv: ragged row");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      out += cells[c];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  write_text(path, out);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(',', start);
      cells.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return cells;
  };
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty CSV");
  table.header = split(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size())
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": ragged CSV row");
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable probe_table(const ProbeSeries& series) {
  CsvTable t;
  t.header = {"t", "x", "y", "ux", "uy"};
  const std::string x = format_double(series.location.x);
  const std::string y = format_double(series.location.y);
  for (const auto& s : series.samples)
    t.rows.push_back({format_double(s.t), x, y, format_double(s.ux), format_double(s.uy)});
  return t;
}

ProbeSeries probe_from_table(const CsvTable& table) {
  const auto ct = table.column("t"), cx = table.column("x"), cy = table.column("y");
  const auto cu = table.column("ux"), cv = table.column("uy");
  ProbeSeries s;
  if (table.rows.empty()) throw FormatError("probe CSV has no samples");
  s.location = {table.number(0, cx), table.number(0, cy)};
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    s.samples.push_back({table.number(r, ct), table.number(r, cu), table.number(r, cv)});
  if (s.samples.size() >= 2) s.sample_interval = s.samples[1].t - s.samples[0].t;
  return s;
}

CsvTable spectrum_table(const Spectrum& s) {
  CsvTable t;
  t.header = {"k", "E", "reliable"};
  for (std::size_t n = 0; n < s.k.size(); ++n)
    t.rows.push_back({std::to_string(s.k[n]), format_double(s.energy[n]), s.reliable(s.k[n]) ? "1" : "0"});
  return t;
}

CsvTable field_table(const UniformGrid& grid, const Field2D& f, const std::string& name) {
  CsvTable t;
  t.header = {"i", "j", "x", "y", name};
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i)
      t.rows.push_back({std::to_string(i), std::to_string(j), format_double(grid.x(i)),
                        format_double(grid.y(j)), format_double(f(i, j))});
  return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qhd
