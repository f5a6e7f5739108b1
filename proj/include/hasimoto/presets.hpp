#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hasimoto/calculus.hpp"
#include "hasimoto/complex_field.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/flows.hpp"
#include "hasimoto/map_field.hpp"
#include "hasimoto/surface.hpp"

namespace hasimoto::presets {

struct PresetInfo {
  std::string name;
  std::string kind;  ///< "map" or "filament"
  std::string parameters;
};

/// Registered presets in a fixed order.
inline const std::vector<PresetInfo>& catalogue() {
  static const std::vector<PresetInfo> list = {
      {"constant_map", "map", "base point u* = (0,0,-1); u(x) = u*"},
      {"great_circle", "map", "u(x) = (cos x, sin x, 0); needs a periodic grid of length 2*pi*m"},
      {"bump", "map",
       "chart bump z(x) = z* + amp*exp(-width*(1 - cos(x - center))); preset.z_star_re, preset.z_star_im "
       "(default 0, 0.2), preset.amplitude (0.3), preset.width (10), preset.center (x_min + L/2)"},
      {"perturbed_geodesic", "map", "normalised (cos x, sin x, delta*sin(2x)); preset.delta (0.1)"},
      {"helix", "filament", "(r cos(theta x), r sin(theta x), h theta x), theta = 1/sqrt(r^2+h^2); preset.r, preset.h (1, 1)"},
      {"circle", "filament", "(cos x, sin x, 0)"},
      {"gaussian_filament", "filament",
       "arc-length curve with tangent angles A*exp(-x^2), B*x*exp(-x^2); preset.amplitude (0.5), preset.twist (0.5)"},
      {"random_bandlimited", "map",
       "chart field with random Fourier modes |k| <= k_max, decaying as 1/(1+k^2); seed, preset.k_max (4), "
       "preset.amplitude (0.3)"},
  };
  return list;
}

inline bool exists(const std::string& name) {
  for (const auto& p : catalogue())
    if (p.name == name) return true;
  return false;
}

inline std::string listing() {
  std::string s;
  for (const auto& p : catalogue()) s += p.name + " [" + p.kind + "]: " + p.parameters + "\n";
  return s;
}

inline void require_period(const GridSpec& g, double period, const std::string& what) {
  if (g.boundary != Boundary::periodic) return;
  const double m = g.length() / period;
  if (std::abs(m - std::round(m)) > 1e-9 || std::round(m) < 1)
    throw ConfigError(what + ": periodic grid length must be a multiple of " + std::to_string(period));
}

inline MapField<UnitSphere> constant_map(const GridSpec& g, const Vec3& u_star = {0.0, 0.0, -1.0}) {
  MapField<UnitSphere> u;
  u.grid = g;
  u.base_point = normalized(u_star);
  u.points.assign(g.size(), u.base_point);
  return u;
}

inline MapField<UnitSphere> great_circle(const GridSpec& g, double speed = 1.0) {
  require_period(g, 2.0 * std::numbers::pi / std::abs(speed), "great_circle");
  MapField<UnitSphere> u;
  u.grid = g;
  for (const double x : g.coordinates()) u.points.push_back({std::cos(speed * x), std::sin(speed * x), 0.0});
  u.base_point = u.points.front();
  return u;
}

/// The equator |z| = 1 traversed at unit speed in the round chart.
inline MapField<ConformalChart> great_circle_chart(const GridSpec& g, ConformalChart chart = ConformalChart(round_metric(), -1)) {
  require_period(g, 2.0 * std::numbers::pi, "great_circle_chart");
  MapField<ConformalChart> z;
  z.grid = g;
  z.surface = std::move(chart);
  for (const double x : g.coordinates()) z.points.push_back(std::polar(1.0, x));
  z.base_point = z.points.front();
  return z;
}

struct BumpParams {
  cplx z_star{0.0, 0.2};
  double amplitude = 0.3;
  double width = 10.0;
  /// Bump centre; NaN selects the midpoint of the domain so the seam is flat.
  double center = std::numeric_limits<double>::quiet_NaN();
};

inline MapField<ConformalChart> bump_chart(const GridSpec& g, const BumpParams& p = {},
                                           ConformalChart chart = ConformalChart(round_metric(), -1)) {
  const double L = g.length();
  const double c = std::isnan(p.center) ? g.x_min + 0.5 * L : p.center;
  MapField<ConformalChart> z;
  z.grid = g;
  z.surface = std::move(chart);
  for (const double x : g.coordinates())
    z.points.push_back(p.z_star + p.amplitude * std::exp(-p.width * (1.0 - std::cos(2.0 * std::numbers::pi * (x - c) / L))));
  z.base_point = p.z_star;
  return z;
}

/// Chart bump mapped to the sphere through the stereographic convention.
inline MapField<UnitSphere> bump(const GridSpec& g, const BumpParams& p = {}) { return to_sphere(bump_chart(g, p)); }

inline MapField<UnitSphere> perturbed_geodesic(const GridSpec& g, double delta = 0.1) {
  require_period(g, 2.0 * std::numbers::pi, "perturbed_geodesic");
  MapField<UnitSphere> u;
  u.grid = g;
  for (const double x : g.coordinates()) u.points.push_back(normalized(Vec3{std::cos(x), std::sin(x), delta * std::sin(2.0 * x)}));
  u.base_point = u.points.front();
  return u;
}

/// Random complex field sum_{|k| <= k_max} c_k exp(i k x) with c_k ~ N(0,1)/(1+k^2), scaled so max |f| = amplitude.
inline ComplexField random_bandlimited_complex(const GridSpec& g, std::uint64_t seed, int k_max, double amplitude) {
  if (k_max < 0) throw ConfigError("preset.k_max must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<std::pair<int, cplx>> modes;
  for (int k = -k_max; k <= k_max; ++k) {
    const double re = n01(rng);
    const double im = n01(rng);
    modes.emplace_back(k, cplx(re, im) / (1.0 + double(k) * k));
  }
  const double w = 2.0 * std::numbers::pi / g.length();
  ComplexField f{g, std::vector<cplx>(g.size())};
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(static_cast<int>(i)) - g.x_min;
    cplx v{};
    for (const auto& [k, ck] : modes) v += ck * std::polar(1.0, w * k * x);
    f[i] = v;
    m = std::max(m, std::abs(v));
  }
  if (m > 0.0)
    for (auto& v : f.values) v *= amplitude / m;
  return f;
}

/// Random smooth sphere map: stereographic image of a random band-limited chart field.
inline MapField<UnitSphere> random_bandlimited(const GridSpec& g, std::uint64_t seed, int k_max = 4,
                                               double amplitude = 0.3) {
  const auto f = random_bandlimited_complex(g, seed, k_max, amplitude);
  MapField<UnitSphere> u;
  u.grid = g;
  for (const auto& z : f.values) u.points.push_back(chart_to_sphere(z));
  u.base_point = u.points.front();
  return u;
}

inline MapField<ConformalChart> random_bandlimited_chart(const GridSpec& g, std::uint64_t seed, int k_max,
                                                         double amplitude, ConformalChart chart) {
  const auto f = random_bandlimited_complex(g, seed, k_max, amplitude);
  MapField<ConformalChart> z;
  z.grid = g;
  z.surface = std::move(chart);
  z.points = f.values;
  z.base_point = z.points.front();
  return z;
}

/// Plane wave A exp(i k x).
inline ComplexField plane_wave(const GridSpec& g, double A, double k) {
  ComplexField f{g, {}};
  for (const double x : g.coordinates()) f.values.push_back(std::polar(A, k * x));
  return f;
}

inline FilamentState helix(const GridSpec& g, double r = 1.0, double h = 1.0) {
  if (!(r > 0.0)) throw ConfigError("preset.r must be positive");
  const double theta = 1.0 / std::sqrt(r * r + h * h);
  require_period(g, 2.0 * std::numbers::pi / theta, "helix");
  FilamentState X;
  X.grid = g;
  for (const double x : g.coordinates())
    X.X.push_back({r * std::cos(theta * x), r * std::sin(theta * x), h * theta * x});
  if (g.boundary == Boundary::periodic) X.period_offset = {0.0, 0.0, h * theta * g.length()};
  return X;
}

inline FilamentState circle(const GridSpec& g) {
  require_period(g, 2.0 * std::numbers::pi, "circle");
  FilamentState X;
  X.grid = g;
  for (const double x : g.coordinates()) X.X.push_back({std::cos(x), std::sin(x), 0.0});
  return X;
}

inline FilamentState straight_line(const GridSpec& g) {
  FilamentState X;
  X.grid = g;
  for (const double x : g.coordinates()) X.X.push_back({x, 0.0, 0.0});
  if (g.boundary == Boundary::periodic) X.period_offset = {g.length(), 0.0, 0.0};
  return X;
}

/// Localised arc-length filament on a line grid: the tangent
/// (cos(th) cos(ph), sin(th) cos(ph), sin(ph)) with th = A e^{-x^2}, ph = B x e^{-x^2}
/// integrated from x_min; straight outside the bump.
inline FilamentState gaussian_filament(const GridSpec& g, double amplitude = 0.5, double twist = 0.5) {
  const std::size_t n = g.size();
  std::vector<Vec3> T(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.x(static_cast<int>(i));
    const double e = std::exp(-x * x);
    const double th = amplitude * e;
    const double ph = twist * x * e;
    T[i] = {std::cos(th) * std::cos(ph), std::sin(th) * std::cos(ph), std::sin(ph)};
  }
  FilamentState X;
  X.grid = g;
  if (g.boundary == Boundary::periodic) {
    const GridCalculus calc(g);
    X.X = calc.cumulative_integral(T, Quadrature::spectral);
    X.period_offset = calc.integral(T);
  } else {
    X.X = GridCalculus(g).cumulative_integral(T, Quadrature::corrected_trapezoid);
  }
  const Vec3 start{g.x_min, 0.0, 0.0};
  for (auto& p : X.X) p += start;
  return X;
}

}  // namespace hasimoto::presets
