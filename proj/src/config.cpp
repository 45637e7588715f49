#include "qhd/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "qhd/errors.hpp"

namespace qhd {

SolverParams RunConfig::solver_params() const {
  SolverParams p;
  p.re = re;
  p.tau = tau;
  p.dt = dt;
  p.upwind = upwind;
  p.sound_speed = sound_speed;
  p.inlet = inlet;
  p.pressure = pressure;
  return p;
}

std::vector<AveragingWindow> RunConfig::effective_windows() const {
  if (!windows.empty()) return windows;
  return {{t_final / 2.0, t_final}};
}

void stderr_warning_sink(std::string_view text) { std::cerr << "warning: " << text << '\n'; }

namespace {

struct KeyInfo {
  std::string_view section;
  bool required;
};

const std::map<std::string, KeyInfo, std::less<>>& key_table() {
  static const std::map<std::string, KeyInfo, std::less<>> table = {
      {"label", {"run", false}},
      {"seed", {"run", false}},
      {"h_over_H", {"geometry", true}},
      {"L", {"geometry", true}},
      {"step_x", {"geometry", false}},
      {"re", {"physics", true}},
      {"tau", {"physics", true}},
      {"sound_speed", {"physics", false}},
      {"hx", {"numerics", true}},
      {"dt", {"numerics", false}},
      {"T0", {"numerics", true}},
      {"upwind", {"numerics", false}},
      {"inlet_profile", {"numerics", false}},
      {"pressure_solver", {"numerics", false}},
      {"perturbation", {"numerics", false}},
      {"field_interval", {"recording", false}},
      {"probe_interval", {"recording", false}},
      {"write_fields", {"recording", false}},
      {"averaging_windows", {"recording", false}},
      {"spectrum_start", {"recording", false}},
      {"locations", {"probes", false}},
      {"quasi_periodic_factor", {"regime", false}},
      {"decay_ratio", {"regime", false}},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double to_double(std::string_view v, int line, std::string_view key) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    fail(line, "value of '" + std::string(key) + "' is not a number: '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_u64(std::string_view v, int line, std::string_view key) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    fail(line, "value of '" + std::string(key) + "' is not an unsigned integer");
  return out;
}

bool to_bool(std::string_view v, int line, std::string_view key) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(line, "value of '" + std::string(key) + "' is not a boolean");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

RunConfig parse_config(std::string_view text, const WarningSink& warn) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
  std::string_view section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string_view> sections = {"run", "geometry", "physics", "numerics",
                                                          "recording", "probes", "regime"};
      if (!sections.contains(section)) fail(line_no, "unknown section [" + std::string(section) + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = key_table().find(key);
    if (it == key_table().end()) fail(line_no, "unknown key '" + key + "'");
    if (!section.empty() && section != it->second.section)
      fail(line_no, "key '" + key + "' belongs to section [" + std::string(it->second.section) + "]");
    if (!seen.insert(key).second) fail(line_no, "duplicate key '" + key + "'");

    if (key == "label") c.label = std::string(value);
    else if (key == "seed") c.seed = to_u64(value, line_no, key);
    else if (key == "h_over_H") c.geometry.step_height_ratio = to_double(value, line_no, key);
    else if (key == "L") c.geometry.channel_length = to_double(value, line_no, key);
    else if (key == "step_x") c.geometry.step_x = to_double(value, line_no, key);
    else if (key == "re") c.re = to_double(value, line_no, key);
    else if (key == "tau") c.tau = to_double(value, line_no, key);
    else if (key == "sound_speed") c.sound_speed = to_double(value, line_no, key);
    else if (key == "hx") c.hx = to_double(value, line_no, key);
    else if (key == "dt") c.dt = to_double(value, line_no, key);
    else if (key == "T0") c.t_final = to_double(value, line_no, key);
    else if (key == "upwind") c.upwind = to_double(value, line_no, key);
    else if (key == "perturbation") c.perturbation = to_double(value, line_no, key);
    else if (key == "field_interval") c.field_interval = to_double(value, line_no, key);
    else if (key == "probe_interval") c.probe_interval = to_double(value, line_no, key);
    else if (key == "spectrum_start") c.spectrum_start = to_double(value, line_no, key);
    else if (key == "quasi_periodic_factor") c.quasi_periodic_factor = to_double(value, line_no, key);
    else if (key == "decay_ratio") c.decay_ratio = to_double(value, line_no, key);
    else if (key == "write_fields") c.write_fields = to_bool(value, line_no, key);
    else if (key == "inlet_profile") {
      try {
        c.inlet = parse_inlet_profile(value);
      } catch (const ConfigError& e) {
        fail(line_no, e.what());
      }
    } else if (key == "pressure_solver") {
      try {
        c.pressure = parse_pressure_solver_kind(value);
      } catch (const ConfigError& e) {
        fail(line_no, e.what());
      }
    } else if (key == "averaging_windows") {
      c.windows.clear();
      for (auto part : split(value, ',')) {
        const auto parts = split(part, ':');
        if (parts.size() != 2) fail(line_no, "averaging window must be t1:t2");
        c.windows.push_back({to_double(parts[0], line_no, key), to_double(parts[1], line_no, key)});
      }
    } else if (key == "locations") {
      c.probes.clear();
      for (auto part : split(value, ';')) {
        if (part.empty()) continue;
        const auto xy = split(part, ',');
        if (xy.size() != 2) fail(line_no, "probe location must be x, y");
        c.probes.push_back({to_double(xy[0], line_no, key), to_double(xy[1], line_no, key)});
      }
    }
  }
  for (const auto& [key, info] : key_table())
    if (info.required && !seen.contains(key))
      throw ConfigError("config: missing required key '" + key + "'");
  if (!(c.tau > 0.0))
    throw ConfigError("config: tau must be strictly positive (the pressure equation scales with tau)");

  for (const auto& w : validate_config(c)) warn(w);
  return c;
}

std::vector<std::string> validate_config(const RunConfig& c) {
  const UniformGrid grid = build_grid(c.geometry, c.hx);
  auto warnings = c.solver_params().validate(grid);
  if (!(c.t_final > 0.0)) throw ConfigError("config: T0 must be positive");
  auto aligned = [&](double interval, const char* name) {
    const double steps = interval / c.dt;
    if (!(interval > 0.0) || std::abs(std::round(steps) * c.dt - interval) > 1e-12 * interval)
      throw ConfigError(std::string("config: ") + name + " must be a whole number of time steps");
  };
  aligned(c.field_interval, "field_interval");
  aligned(c.probe_interval, "probe_interval");
  for (const auto& w : c.windows)
    if (!(w.t2 > w.t1) || w.t1 < 0.0)
      throw ConfigError("config: averaging window needs 0 <= t1 < t2");
  for (const auto& p : c.probes) {
    if (!(p.x > 0.0 && p.x < grid.x(grid.nx() - 1) && p.y > 0.0 && p.y < grid.y(grid.ny() - 1)))
      throw ConfigError("config: probe location outside the channel");
  }
  if (!(c.quasi_periodic_factor > 1.0) || !(c.decay_ratio > 0.0 && c.decay_ratio < 1.0))
    throw ConfigError("config: regime thresholds need factor > 1 and 0 < decay_ratio < 1");
  if (!(c.perturbation >= 0.0)) throw ConfigError("config: perturbation must be non-negative");
  return warnings;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\n";
  os << "label = " << c.label << '\n';
  os << "seed = " << c.seed << '\n';
  os << "\n[geometry]\n";
  os << "h_over_H = " << fmt_double(c.geometry.step_height_ratio) << '\n';
  os << "L = " << fmt_double(c.geometry.channel_length) << '\n';
  os << "step_x = " << fmt_double(c.geometry.step_x) << '\n';
  os << "\n[physics]\n";
  os << "re = " << fmt_double(c.re) << '\n';
  os << "tau = " << fmt_double(c.tau) << '\n';
  os << "sound_speed = " << fmt_double(c.sound_speed) << '\n';
  os << "\n[numerics]\n";
  os << "hx = " << fmt_double(c.hx) << '\n';
  os << "dt = " << fmt_double(c.dt) << '\n';
  os << "T0 = " << fmt_double(c.t_final) << '\n';
  os << "upwind = " << fmt_double(c.upwind) << '\n';
  os << "inlet_profile = " << to_string(c.inlet) << '\n';
  os << "pressure_solver = " << to_string(c.pressure) << '\n';
  os << "perturbation = " << fmt_double(c.perturbation) << '\n';
  os << "\n[recording]\n";
  os << "field_interval = " << fmt_double(c.field_interval) << '\n';
  os << "probe_interval = " << fmt_double(c.probe_interval) << '\n';
  os << "write_fields = " << (c.write_fields ? "true" : "false") << '\n';
  if (!c.windows.empty()) {
    os << "averaging_windows = ";
    for (std::size_t n = 0; n < c.windows.size(); ++n)
      os << (n ? ", " : "") << fmt_double(c.windows[n].t1) << ':' << fmt_double(c.windows[n].t2);
    os << '\n';
  }
  os << "spectrum_start = " << fmt_double(c.spectrum_start) << '\n';
  os << "\n[probes]\n";
  os << "locations = ";
  for (std::size_t n = 0; n < c.probes.size(); ++n)
    os << (n ? "; " : "") << fmt_double(c.probes[n].x) << ", " << fmt_double(c.probes[n].y);
  os << '\n';
  os << "\n[regime]\n";
  os << "quasi_periodic_factor = " << fmt_double(c.quasi_periodic_factor) << '\n';
  os << "decay_ratio = " << fmt_double(c.decay_ratio) << '\n';
  return os.str();
}

std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace qhd
