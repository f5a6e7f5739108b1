#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>

#include "hasimoto/errors.hpp"
#include "hasimoto/flows.hpp"
#include "hasimoto/presets.hpp"
#include "hasimoto/surface.hpp"

namespace hasimoto {

// ---------------------------------------------------------------------------
// Flat INI text: key = value, optional [section] prefixes, # or ; comments
// ---------------------------------------------------------------------------

struct IniEntry {
  std::string value;
  std::string origin;  ///< "file:line" or "--override"
};

class IniFile {
 public:
  static IniFile parse(std::istream& in, const std::string& source = "config") {
    IniFile f;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string where = source + ":" + std::to_string(lineno);
      const std::string s = trim(strip_comment(line));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']' || s.size() < 3) throw ConfigError(where + ": malformed section header '" + s + "'");
        section = trim(s.substr(1, s.size() - 2));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + s + "'");
      std::string key = trim(s.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      if (!section.empty()) key = section + "." + key;
      if (f.entries_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
      f.entries_[key] = {trim(s.substr(eq + 1)), where};
    }
    return f;
  }

  static IniFile parse_string(const std::string& text, const std::string& source = "config") {
    std::istringstream in(text);
    return parse(in, source);
  }

  static IniFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse(in, path);
  }

  /// key=value from the command line; replaces any earlier value.
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || trim(kv.substr(0, eq)).empty())
      throw ConfigError("--override '" + kv + "': expected key=value");
    entries_[trim(kv.substr(0, eq))] = {trim(kv.substr(eq + 1)), "--override"};
  }

  void set(const std::string& key, const std::string& value, const std::string& origin = "default") {
    entries_[key] = {value, origin};
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, IniEntry>& entries() const { return entries_; }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto p = s.find_first_of("#;");
    return p == std::string::npos ? s : s.substr(0, p);
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, IniEntry> entries_;
};

namespace detail {

inline std::string describe(const std::string& key, const IniEntry& e) { return e.origin + ": key '" + key + "'"; }

/// Reals: a signed product/quotient of numbers, pi and sqrt(number), e.g. "-pi/2", "2*pi*sqrt(2)", "2pi".
inline double parse_real(const std::string& key, const IniEntry& e) {
  std::string s = e.value;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  auto bad = [&]() -> ConfigError {
    return ConfigError(describe(key, e) + ": expected a finite number, got '" + e.value + "'");
  };
  std::size_t pos = 0;
  double sign = 1.0;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) sign = s[pos++] == '-' ? -1.0 : 1.0;
  auto number = [&]() {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s.substr(pos), &used);
    } catch (const std::exception&) {
      throw bad();
    }
    pos += used;
    return v;
  };
  auto factor = [&]() {
    if (s.compare(pos, 2, "pi") == 0) {
      pos += 2;
      return std::numbers::pi;
    }
    if (s.compare(pos, 5, "sqrt(") == 0) {
      pos += 5;
      const double v = number();
      if (pos >= s.size() || s[pos] != ')' || v < 0.0) throw bad();
      ++pos;
      return std::sqrt(v);
    }
    const double v = number();
    // "2pi" as shorthand for 2*pi
    if (s.compare(pos, 2, "pi") == 0) {
      pos += 2;
      return v * std::numbers::pi;
    }
    return v;
  };
  if (s.empty()) throw bad();
  double r = sign * factor();
  while (pos < s.size()) {
    const char op = s[pos++];
    if (op == '*') r *= factor();
    else if (op == '/') r /= factor();
    else throw bad();
  }
  if (!std::isfinite(r)) throw bad();
  return r;
}

inline long long parse_integer(const std::string& key, const IniEntry& e) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(describe(key, e) + ": expected an integer, got '" + e.value + "'");
  }
}

inline bool parse_bool(const std::string& key, const IniEntry& e) {
  std::string s = e.value;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(describe(key, e) + ": expected a boolean, got '" + e.value + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

struct TargetSpec {
  std::string kind = "sphere";  ///< sphere | chart
  std::string metric = "round";  ///< round | perturbed (chart only)
  double eps = 0.2;
  int orientation = -1;
};

struct VerifySpec {
  bool residual = true;
  bool convergence = true;
  bool commutation = true;
  bool invariants = true;
  bool hypothesis = true;
  int levels = 3;
  double t_center = 0.01;
  double spacing = 1e-3;  ///< time-slice spacing of the residual stencil at level 0
  double expected_ratio = 16.0;
  double band = 2.0;
  double residual_tolerance = 1e-4;
  double identity_tolerance = 1e-10;
  double energy_tolerance = 1e-6;
};

struct ScenarioConfig {
  TargetSpec target;
  int grid_n = 256;
  double x_min = 0.0;
  double x_max = 2.0 * std::numbers::pi;
  Boundary boundary = Boundary::periodic;
  int margin = 0;

  FlowParams flow = FlowParams::schrodinger_map();

  std::optional<double> dt;  ///< empty: automatic
  double t_final = 0.1;
  int stride = 1;
  Projection projection = Projection::per_step;
  double cfl_safety = 0.2;

  std::string preset = "bump";
  std::map<std::string, double> preset_params;
  std::uint64_t seed = 0;

  VerifySpec verify;
  std::string output_dir = "out";
  std::string transform_input;

  bool filament() const {
    return flow.kind == FlowKind::filament_third || flow.kind == FlowKind::filament_fourth;
  }

  double param(const std::string& name, double fallback) const {
    const auto it = preset_params.find(name);
    return it == preset_params.end() ? fallback : it->second;
  }
};

inline const std::set<std::string>& preset_parameter_names() {
  static const std::set<std::string> names{"z_star_re", "z_star_im", "amplitude", "width", "center", "delta",
                                           "r",         "h",         "twist",     "k_max", "speed"};
  return names;
}

inline const std::set<std::string>& filament_presets() {
  static const std::set<std::string> names{"helix", "circle", "gaussian_filament", "straight_line"};
  return names;
}

/// Build a scenario from parsed INI entries; unknown keys and bad values name the key.
inline ScenarioConfig scenario_from_ini(const IniFile& ini) {
  using namespace detail;
  ScenarioConfig c;
  std::optional<double> a, b, cc, C1, Cb, fm_a;
  std::string flow_kind = "schrodinger_map";
  const IniEntry* flow_kind_entry = nullptr;

  for (const auto& [key, e] : ini.entries()) {
    auto real = [&] { return parse_real(key, e); };
    auto integer = [&] { return parse_integer(key, e); };
    auto boolean = [&] { return parse_bool(key, e); };
    if (key == "target.kind") {
      if (e.value != "sphere" && e.value != "chart")
        throw ConfigError(describe(key, e) + ": expected sphere or chart, got '" + e.value + "'");
      c.target.kind = e.value;
    } else if (key == "target.metric") {
      if (e.value != "round" && e.value != "perturbed")
        throw ConfigError(describe(key, e) + ": expected round or perturbed, got '" + e.value + "'");
      c.target.metric = e.value;
    } else if (key == "target.eps") {
      c.target.eps = real();
    } else if (key == "target.orientation") {
      const auto o = integer();
      if (o != 1 && o != -1) throw ConfigError(describe(key, e) + ": must be 1 or -1");
      c.target.orientation = static_cast<int>(o);
    } else if (key == "grid.n") {
      const auto n = integer();
      if (n < 8 || n > (1 << 22)) throw ConfigError(describe(key, e) + ": must lie in [8, 4194304]");
      c.grid_n = static_cast<int>(n);
    } else if (key == "grid.x_min") {
      c.x_min = real();
    } else if (key == "grid.x_max") {
      c.x_max = real();
    } else if (key == "grid.boundary") {
      if (e.value == "periodic") c.boundary = Boundary::periodic;
      else if (e.value == "line" || e.value == "line_truncated") c.boundary = Boundary::line_truncated;
      else throw ConfigError(describe(key, e) + ": expected periodic or line, got '" + e.value + "'");
    } else if (key == "grid.margin") {
      const auto m = integer();
      if (m < 0) throw ConfigError(describe(key, e) + ": margin must be >= 0");
      c.margin = static_cast<int>(m);
    } else if (key == "flow.kind") {
      flow_kind = e.value;
      flow_kind_entry = &e;
    } else if (key == "flow.a") {
      a = real();
    } else if (key == "flow.b") {
      b = real();
    } else if (key == "flow.c") {
      cc = real();
    } else if (key == "flow.C1") {
      C1 = real();
    } else if (key == "flow.Cb") {
      Cb = real();
    } else if (key == "flow.fm_a" || key == "flow.fm-a") {
      fm_a = real();
    } else if (key == "evolution.dt") {
      if (e.value == "auto") c.dt.reset();
      else {
        c.dt = real();
        if (!(*c.dt > 0.0)) throw ConfigError(describe(key, e) + ": dt must be positive or 'auto'");
      }
    } else if (key == "evolution.t_final") {
      c.t_final = real();
      if (!(c.t_final >= 0.0)) throw ConfigError(describe(key, e) + ": must be >= 0");
    } else if (key == "evolution.stride") {
      const auto s = integer();
      if (s < 1) throw ConfigError(describe(key, e) + ": must be >= 1");
      c.stride = static_cast<int>(s);
    } else if (key == "evolution.projection") {
      try {
        c.projection = projection_from_string(e.value);
      } catch (const ConfigError&) {
        throw ConfigError(describe(key, e) + ": expected per_step, per_stage or off, got '" + e.value + "'");
      }
    } else if (key == "evolution.cfl_safety") {
      c.cfl_safety = real();
      if (!(c.cfl_safety > 0.0)) throw ConfigError(describe(key, e) + ": must be positive");
    } else if (key == "preset.name") {
      if (!presets::exists(e.value) && e.value != "straight_line")
        throw ConfigError(describe(key, e) + ": unknown preset '" + e.value + "' (see `hasimoto presets`)");
      c.preset = e.value;
    } else if (key.rfind("preset.", 0) == 0) {
      const std::string p = key.substr(7);
      if (!preset_parameter_names().count(p)) throw ConfigError(describe(key, e) + ": unknown preset parameter");
      c.preset_params[p] = real();
    } else if (key == "seed") {
      const auto s = integer();
      if (s < 0) throw ConfigError(describe(key, e) + ": must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "verify.residual") {
      c.verify.residual = boolean();
    } else if (key == "verify.convergence") {
      c.verify.convergence = boolean();
    } else if (key == "verify.commutation") {
      c.verify.commutation = boolean();
    } else if (key == "verify.invariants") {
      c.verify.invariants = boolean();
    } else if (key == "verify.hypothesis") {
      c.verify.hypothesis = boolean();
    } else if (key == "verify.levels") {
      const auto l = integer();
      if (l < 3 || l > 6) throw ConfigError(describe(key, e) + ": must lie in [3, 6]");
      c.verify.levels = static_cast<int>(l);
    } else if (key == "verify.t_center") {
      c.verify.t_center = real();
    } else if (key == "verify.spacing") {
      c.verify.spacing = real();
      if (!(c.verify.spacing > 0.0)) throw ConfigError(describe(key, e) + ": must be positive");
    } else if (key == "verify.expected_ratio") {
      c.verify.expected_ratio = real();
    } else if (key == "verify.band") {
      c.verify.band = real();
      if (!(c.verify.band >= 1.0)) throw ConfigError(describe(key, e) + ": must be >= 1");
    } else if (key == "verify.residual_tolerance") {
      c.verify.residual_tolerance = real();
    } else if (key == "verify.identity_tolerance") {
      c.verify.identity_tolerance = real();
    } else if (key == "verify.energy_tolerance") {
      c.verify.energy_tolerance = real();
    } else if (key == "output.dir") {
      c.output_dir = e.value;
    } else if (key == "transform.input") {
      c.transform_input = e.value;
    } else {
      throw ConfigError(describe(key, e) + ": unknown key");
    }
  }

  // flow assembly
  auto where = [&](const std::string& k) {
    return flow_kind_entry ? describe(k, *flow_kind_entry) : std::string("key '" + k + "'");
  };
  FlowKind kind;
  try {
    kind = flow_kind_from_string(flow_kind);
  } catch (const ConfigError&) {
    throw ConfigError(where("flow.kind") + ": unknown flow kind '" + flow_kind + "'");
  }
  auto forbid = [&](bool present, const std::string& what) {
    if (present) throw ConfigError(where("flow.kind") + ": " + what + " does not apply to " + flow_kind);
  };
  switch (kind) {
    case FlowKind::schrodinger_map:
      forbid(a || b || cc || C1 || Cb || fm_a, "flow coefficients");
      c.flow = FlowParams::schrodinger_map();
      break;
    case FlowKind::third_order:
      forbid(cc || C1 || Cb, "flow.c / flow.C1 / flow.Cb");
      if (fm_a) {
        forbid(a.has_value() || b.has_value(), "flow.a / flow.b together with flow.fm_a");
        c.flow = coefficient_map_fm(*fm_a);
      } else {
        c.flow = FlowParams::third_order(a.value_or(0.0), b.value_or(0.0));
      }
      break;
    case FlowKind::fourth_order:
      forbid(fm_a.has_value(), "flow.fm_a");
      if (C1 || Cb) {
        forbid(a || b || cc, "flow.a / flow.b / flow.c together with flow.C1 / flow.Cb");
        c.flow = coefficient_map_f(C1.value_or(0.0), Cb.value_or(0.0));
      } else {
        c.flow = FlowParams::fourth_order(a.value_or(0.0), b.value_or(0.0), cc.value_or(0.0));
      }
      break;
    case FlowKind::filament_third:
      forbid(b || cc || C1 || Cb || fm_a, "flow.b / flow.c / flow.C1 / flow.Cb / flow.fm_a");
      c.flow = FlowParams::filament_third(a.value_or(0.0));
      break;
    case FlowKind::filament_fourth:
      forbid(a || b || cc || fm_a, "flow.a / flow.b / flow.c / flow.fm_a");
      c.flow = FlowParams::filament_fourth(C1.value_or(0.0), Cb.value_or(0.0));
      break;
  }
  c.flow.validate();

  // cross-field checks
  if (!(c.x_max > c.x_min)) throw ConfigError("grid.x_max must exceed grid.x_min");
  if (c.filament() != (filament_presets().count(c.preset) != 0))
    throw ConfigError("preset.name '" + c.preset + "' does not match flow.kind '" + flow_kind + "'");
  if (c.filament() && c.target.kind != "sphere")
    throw ConfigError("target.kind: filament flows use no target surface");
  if (c.target.kind == "sphere" && ini.has("target.metric"))
    throw ConfigError(ini.entries().at("target.metric").origin + ": key 'target.metric' needs target.kind=chart");
  if (c.margin > 0 && 2 * c.margin >= c.grid_n) throw ConfigError("grid.margin leaves no interior points");
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides = {}) {
  IniFile ini = path.empty() ? IniFile{} : IniFile::load(path);
  for (const auto& o : overrides) ini.apply_override(o);
  return scenario_from_ini(ini);
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

inline GridSpec make_grid(const ScenarioConfig& c, int n) {
  return c.boundary == Boundary::periodic ? GridSpec::periodic(n, c.x_min, c.x_max) : GridSpec::line(n, c.x_min, c.x_max);
}

inline GridSpec make_grid(const ScenarioConfig& c) { return make_grid(c, c.grid_n); }

inline ConformalChart make_chart(const TargetSpec& t) {
  if (t.metric == "round") return ConformalChart(round_metric(), t.orientation);
  if (t.metric == "perturbed") return ConformalChart(perturbed_round_metric(t.eps), t.orientation);
  throw ConfigError("target.metric: unknown metric '" + t.metric + "'");
}

inline EvolutionConfig make_evolution(const ScenarioConfig& c) {
  EvolutionConfig e;
  e.dt = c.dt.value_or(0.0);
  e.t_final = c.t_final;
  e.snapshot_stride = c.stride;
  e.projection = c.projection;
  e.cfl_safety = c.cfl_safety;
  return e;
}

using SphereMap = MapField<UnitSphere>;
using ChartMap = MapField<ConformalChart>;
using InitialState = std::variant<SphereMap, ChartMap, FilamentState>;

/// Preset initial data on the scenario target, sampled on grid g.
inline InitialState make_initial(const ScenarioConfig& c, const GridSpec& g) {
  const std::string& name = c.preset;
  if (c.filament()) {
    if (name == "helix") return presets::helix(g, c.param("r", 1.0), c.param("h", 1.0));
    if (name == "circle") return presets::circle(g);
    if (name == "straight_line") return presets::straight_line(g);
    return presets::gaussian_filament(g, c.param("amplitude", 0.5), c.param("twist", 0.5));
  }
  const bool chart = c.target.kind == "chart";
  const ConformalChart surface = chart ? make_chart(c.target) : ConformalChart(round_metric(), -1);
  presets::BumpParams bp;
  bp.z_star = {c.param("z_star_re", bp.z_star.real()), c.param("z_star_im", bp.z_star.imag())};
  bp.amplitude = c.param("amplitude", bp.amplitude);
  bp.width = c.param("width", bp.width);
  bp.center = c.param("center", bp.center);

  if (name == "bump") {
    auto z = presets::bump_chart(g, bp, surface);
    if (chart) return z;
    return to_sphere(z);
  }
  if (name == "random_bandlimited") {
    const double k = c.param("k_max", 4.0);
    if (k < 0 || k != std::floor(k)) throw ConfigError("preset.k_max must be a non-negative integer");
    auto z = presets::random_bandlimited_chart(g, c.seed, static_cast<int>(k), c.param("amplitude", 0.3), surface);
    if (chart) return z;
    return to_sphere(z);
  }
  SphereMap u;
  if (name == "constant_map") {
    if (chart) {
      ChartMap z;
      z.grid = g;
      z.surface = surface;
      z.base_point = bp.z_star;
      z.points.assign(g.size(), bp.z_star);
      return z;
    }
    u = presets::constant_map(g);
  } else if (name == "great_circle") {
    if (chart) {
      if (c.param("speed", 1.0) != 1.0) throw ConfigError("preset.speed: chart great circle has unit speed");
      return presets::great_circle_chart(g, surface);
    }
    u = presets::great_circle(g, c.param("speed", 1.0));
  } else if (name == "perturbed_geodesic") {
    u = presets::perturbed_geodesic(g, c.param("delta", 0.1));
  } else {
    throw ConfigError("preset.name: unknown preset '" + name + "' (see `hasimoto presets`)");
  }
  if (chart) return to_chart(u, surface);
  return u;
}

inline InitialState make_initial(const ScenarioConfig& c) { return make_initial(c, make_grid(c)); }

}  // namespace hasimoto
