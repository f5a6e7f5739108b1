#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hasimoto/config.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/flows.hpp"
#include "hasimoto/verify.hpp"

namespace hasimoto::io {

/// Round-trip text for a double: 17 significant digits, inf/-inf/nan spelled out.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(where + ": not a number '" + s + "'");
}

// ---------------------------------------------------------------------------
// CSV tables: "# key=value" metadata lines, one header line, numeric rows
// ---------------------------------------------------------------------------

struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw ConfigError("csv: missing column '" + name + "'");
  }

  const std::string& require_meta(const std::string& key) const {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ConfigError("csv: missing metadata '" + key + "'");
    return it->second;
  }
};

inline void write_csv(std::ostream& out, const CsvTable& t) {
  for (const auto& [k, v] : t.meta) out << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw ConfigError("csv: row width does not match header");
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << "\n";
  }
}

inline CsvTable read_csv(std::istream& in, const std::string& source = "csv") {
  CsvTable t;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      t.meta[key] = line.substr(eq + 1);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header) {
      t.columns = cells;
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) throw ConfigError(where + ": expected " + std::to_string(t.columns.size()) + " columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, where));
    t.rows.push_back(std::move(row));
  }
  if (!header) throw ConfigError(source + ": no header line");
  return t;
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  write_csv(out, t);
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return read_csv(in, path);
}

// ---------------------------------------------------------------------------
// Trajectory files
// ---------------------------------------------------------------------------

inline void put_grid_meta(CsvTable& t, const GridSpec& g) {
  t.meta["grid.n"] = std::to_string(g.n_points);
  t.meta["grid.x_min"] = format_double(g.x_min);
  t.meta["grid.x_max"] = format_double(g.x_max);
  t.meta["grid.boundary"] = g.boundary == Boundary::periodic ? "periodic" : "line";
}

inline GridSpec grid_from_meta(const CsvTable& t) {
  const int n = static_cast<int>(parse_double(t.require_meta("grid.n"), "grid.n"));
  const double a = parse_double(t.require_meta("grid.x_min"), "grid.x_min");
  const double b = parse_double(t.require_meta("grid.x_max"), "grid.x_max");
  const std::string& bd = t.require_meta("grid.boundary");
  if (bd == "periodic") return GridSpec::periodic(n, a, b);
  if (bd == "line") return GridSpec::line(n, a, b);
  throw ConfigError("csv: unknown grid.boundary '" + bd + "'");
}

inline std::string vec_text(const Vec3& v) {
  return format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z);
}

inline Vec3 vec_from_text(const std::string& s, const std::string& key) {
  std::istringstream in(s);
  std::string a, b, c;
  in >> a >> b >> c;
  return {parse_double(a, key), parse_double(b, key), parse_double(c, key)};
}

using AnyTrajectory = std::variant<Trajectory<SphereMap>, Trajectory<ChartMap>, Trajectory<FilamentState>>;

/// Columns: t, x, then u1,u2,u3 (sphere), z_re,z_im (chart) or X1,X2,X3 (filament).
inline CsvTable trajectory_table(const Trajectory<SphereMap>& tr) {
  CsvTable t;
  t.meta["state"] = "sphere";
  if (tr.states.empty()) throw ConfigError("empty trajectory");
  put_grid_meta(t, tr.states.front().grid);
  t.meta["base_point"] = vec_text(tr.states.front().base_point);
  t.columns = {"t", "x", "u1", "u2", "u3"};
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& u = tr.states[k];
    for (std::size_t i = 0; i < u.size(); ++i)
      t.rows.push_back({tr.times[k], u.grid.x(static_cast<int>(i)), u.points[i].x, u.points[i].y, u.points[i].z});
  }
  return t;
}

inline CsvTable trajectory_table(const Trajectory<ChartMap>& tr, const TargetSpec& target) {
  CsvTable t;
  t.meta["state"] = "chart";
  if (tr.states.empty()) throw ConfigError("empty trajectory");
  put_grid_meta(t, tr.states.front().grid);
  t.meta["target.metric"] = target.metric;
  t.meta["target.eps"] = format_double(target.eps);
  t.meta["target.orientation"] = std::to_string(target.orientation);
  const cplx b = tr.states.front().base_point;
  t.meta["base_point"] = format_double(b.real()) + " " + format_double(b.imag());
  t.columns = {"t", "x", "z_re", "z_im"};
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& z = tr.states[k];
    for (std::size_t i = 0; i < z.size(); ++i)
      t.rows.push_back({tr.times[k], z.grid.x(static_cast<int>(i)), z.points[i].real(), z.points[i].imag()});
  }
  return t;
}

inline CsvTable trajectory_table(const Trajectory<FilamentState>& tr) {
  CsvTable t;
  t.meta["state"] = "filament";
  if (tr.states.empty()) throw ConfigError("empty trajectory");
  put_grid_meta(t, tr.states.front().grid);
  t.meta["period_offset"] = vec_text(tr.states.front().period_offset);
  t.columns = {"t", "x", "X1", "X2", "X3"};
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& f = tr.states[k];
    for (std::size_t i = 0; i < f.size(); ++i)
      t.rows.push_back({tr.times[k], f.grid.x(static_cast<int>(i)), f.X[i].x, f.X[i].y, f.X[i].z});
  }
  return t;
}

/// Inverse of trajectory_table; the grid, target and anchor come from the metadata lines.
inline AnyTrajectory trajectory_from_table(const CsvTable& t) {
  const GridSpec g = grid_from_meta(t);
  const std::string& state = t.require_meta("state");
  const std::size_t n = g.size();
  if (t.rows.empty() || t.rows.size() % n != 0) throw ConfigError("csv: row count is not a multiple of grid.n");
  const std::size_t snaps = t.rows.size() / n;
  const std::size_t ct = t.column("t");
  auto times = [&](auto& tr) {
    for (std::size_t k = 0; k < snaps; ++k) {
      const double tk = t.rows[k * n][ct];
      for (std::size_t i = 0; i < n; ++i)
        if (t.rows[k * n + i][ct] != tk) throw ConfigError("csv: snapshot " + std::to_string(k) + " mixes times");
      tr.times.push_back(tk);
    }
  };
  if (state == "sphere") {
    Trajectory<SphereMap> tr;
    times(tr);
    const std::size_t c1 = t.column("u1"), c2 = t.column("u2"), c3 = t.column("u3");
    const Vec3 base = vec_from_text(t.require_meta("base_point"), "base_point");
    for (std::size_t k = 0; k < snaps; ++k) {
      SphereMap u;
      u.grid = g;
      u.base_point = base;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& r = t.rows[k * n + i];
        u.points.push_back({r[c1], r[c2], r[c3]});
      }
      tr.states.push_back(std::move(u));
    }
    return tr;
  }
  if (state == "chart") {
    TargetSpec target;
    target.kind = "chart";
    target.metric = t.require_meta("target.metric");
    target.eps = parse_double(t.require_meta("target.eps"), "target.eps");
    target.orientation = static_cast<int>(parse_double(t.require_meta("target.orientation"), "target.orientation"));
    const ConformalChart chart = make_chart(target);
    std::istringstream bp(t.require_meta("base_point"));
    std::string re, im;
    bp >> re >> im;
    const cplx base{parse_double(re, "base_point"), parse_double(im, "base_point")};
    Trajectory<ChartMap> tr;
    times(tr);
    const std::size_t cr = t.column("z_re"), ci = t.column("z_im");
    for (std::size_t k = 0; k < snaps; ++k) {
      ChartMap z;
      z.grid = g;
      z.surface = chart;
      z.base_point = base;
      for (std::size_t i = 0; i < n; ++i) z.points.push_back({t.rows[k * n + i][cr], t.rows[k * n + i][ci]});
      tr.states.push_back(std::move(z));
    }
    return tr;
  }
  if (state == "filament") {
    Trajectory<FilamentState> tr;
    times(tr);
    const std::size_t c1 = t.column("X1"), c2 = t.column("X2"), c3 = t.column("X3");
    const Vec3 off = vec_from_text(t.require_meta("period_offset"), "period_offset");
    for (std::size_t k = 0; k < snaps; ++k) {
      FilamentState f;
      f.grid = g;
      f.period_offset = off;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& r = t.rows[k * n + i];
        f.X.push_back({r[c1], r[c2], r[c3]});
      }
      tr.states.push_back(std::move(f));
    }
    return tr;
  }
  throw ConfigError("csv: unknown state '" + state + "'");
}

/// Columns: t, energy, membership_defect, arc_length_defect.
template <class State>
CsvTable diagnostics_table(const Trajectory<State>& tr) {
  CsvTable t;
  t.columns = {"t", "energy", "membership_defect", "arc_length_defect"};
  for (std::size_t k = 0; k < tr.diagnostics.size() && k < tr.times.size(); ++k) {
    const auto& d = tr.diagnostics[k];
    t.rows.push_back({tr.times[k], d.energy, d.membership_defect, d.arc_length_defect});
  }
  return t;
}

// ---------------------------------------------------------------------------
// JSON reports; non-finite numbers become the strings "inf", "-inf", "nan"
// ---------------------------------------------------------------------------

using json = nlohmann::ordered_json;

inline json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>(), "json");
  throw ConfigError("json: expected a number");
}

inline std::vector<double> to_doubles(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(to_double(x));
  return v;
}

inline json to_json(const VerificationReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["check"] = r.check;
  j["verdict"] = r.verdict;
  j["times"] = numbers(r.times);
  j["l2"] = numbers(r.l2);
  j["linf"] = numbers(r.linf);
  j["levels"] = numbers(r.levels);
  j["level_l2"] = numbers(r.level_l2);
  j["level_linf"] = numbers(r.level_linf);
  j["orders_l2"] = numbers(r.orders_l2);
  j["orders_linf"] = numbers(r.orders_linf);
  j["metrics"] = json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = number(v);
  j["series"] = json::object();
  for (const auto& [k, v] : r.series) j["series"][k] = numbers(v);
  j["flags"] = json::object();
  for (const auto& [k, v] : r.flags) j["flags"][k] = v;
  j["notes"] = r.notes;
  return j;
}

inline VerificationReport report_from_json(const json& j) {
  VerificationReport r;
  try {
    r.scenario = j.at("scenario").get<std::string>();
    r.check = j.at("check").get<std::string>();
    r.verdict = j.at("verdict").get<std::string>();
    r.times = to_doubles(j.at("times"));
    r.l2 = to_doubles(j.at("l2"));
    r.linf = to_doubles(j.at("linf"));
    r.levels = to_doubles(j.at("levels"));
    r.level_l2 = to_doubles(j.at("level_l2"));
    r.level_linf = to_doubles(j.at("level_linf"));
    r.orders_l2 = to_doubles(j.at("orders_l2"));
    r.orders_linf = to_doubles(j.at("orders_linf"));
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = to_double(v);
    for (const auto& [k, v] : j.at("series").items()) r.series[k] = to_doubles(v);
    for (const auto& [k, v] : j.at("flags").items()) r.flags[k] = v.get<bool>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report json: ") + e.what());
  }
  return r;
}

/// 17 significant digits for every floating-point value.
inline std::string dump(const json& j) {
  std::ostringstream out;
  std::function<void(const json&, int)> emit = [&](const json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    if (v.is_object()) {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [k, x] : v.items()) {
        out << (first ? "" : ",\n") << pad << json(k).dump() << ": ";
        emit(x, indent + 2);
        first = false;
      }
      out << "\n" << close << "}";
    } else if (v.is_array()) {
      if (v.empty()) {
        out << "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_primitive(); });
      out << "[";
      bool first = true;
      for (const auto& x : v) {
        out << (first ? "" : ", ");
        if (!flat) out << "\n" << pad;
        emit(x, indent + 2);
        first = false;
      }
      if (!flat) out << "\n" << close;
      out << "]";
    } else if (v.is_number_float()) {
      out << format_double(v.get<double>());
    } else {
      out << v.dump();
    }
  };
  emit(j, 0);
  out << "\n";
  return out.str();
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << dump(j);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace hasimoto::io
