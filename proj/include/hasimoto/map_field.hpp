#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hasimoto/calculus.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/grid.hpp"
#include "hasimoto/surface.hpp"

namespace hasimoto {

/// Collected non-fatal warnings (coarse grids, gauge issues, ...).
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

/// A discretised map u(x) into the surface S together with its x -> -inf anchor.
template <class S>
struct MapField {
  using Point = typename S::Point;
  using Tangent = typename S::Tangent;

  GridSpec grid;
  S surface;
  std::vector<Point> points;
  Point base_point{};

  std::size_t size() const { return points.size(); }

  /// Largest violation of the surface membership invariant.
  double membership_defect() const {
    double worst = 0.0;
    for (const auto& p : points) worst = std::max(worst, surface.membership_defect(p));
    return worst;
  }

  void validate(double tolerance = 1e-10) const {
    if (points.size() != grid.size()) throw ConfigError("map field length does not match grid");
    for (const auto& p : points)
      if (surface.membership_defect(p) > tolerance)
        throw DomainError("map field point violates the surface membership invariant");
  }

  /// Largest distance to the base point over the first and last `margin` points.
  double margin_deviation(int margin) const {
    double worst = 0.0;
    const int n = static_cast<int>(points.size());
    for (int i = 0; i < std::min(margin, n); ++i) {
      worst = std::max(worst, S::point_distance(points[static_cast<std::size_t>(i)], base_point));
      worst = std::max(worst, S::point_distance(points[static_cast<std::size_t>(n - 1 - i)], base_point));
    }
    return worst;
  }

  /// Decay hypothesis on truncated lines: u equals u* on both margins.
  bool margin_flat(int margin, double tolerance) const { return margin_deviation(margin) <= tolerance; }
};

/// Vector field along a map (one tangent vector per grid point).
template <class S>
struct TangentField {
  std::vector<typename S::Tangent> values;

  std::size_t size() const { return values.size(); }
  const typename S::Tangent& operator[](std::size_t i) const { return values[i]; }
  typename S::Tangent& operator[](std::size_t i) { return values[i]; }
};

/// Largest |g(V, u)| for sphere fields (tangency defect); zero for charts.
inline double tangency_defect(const MapField<UnitSphere>& u, const TangentField<UnitSphere>& v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(dot(v[i], u.points[i])));
  return worst;
}

template <class S>
void warn_if_coarse(const GridCalculus& calc, Diagnostics* diag) {
  if (diag && calc.periodic() && calc.grid().n_points < GridCalculus::recommended_min_points)
    diag->warn("grid has fewer than 16 points; spectral derivatives are unreliable");
}

/// u_x along the map.
template <class S>
TangentField<S> map_derivative(const MapField<S>& u, const GridCalculus& calc) {
  return {calc.derivative(u.points, 1)};
}

/// nabla_x V = V_x + Gamma(u)(u_x, V), V_x by grid differentiation.
template <class S>
TangentField<S> covariant_derivative_x(const MapField<S>& u, const TangentField<S>& ux, const TangentField<S>& v,
                                       const GridCalculus& calc, Diagnostics* diag = nullptr) {
  warn_if_coarse<S>(calc, diag);
  auto vx = calc.derivative(v.values, 1);
  for (std::size_t i = 0; i < vx.size(); ++i) vx[i] += u.surface.connection(u.points[i], ux[i], v[i]);
  return {std::move(vx)};
}

template <class S>
TangentField<S> covariant_derivative_x(const MapField<S>& u, const TangentField<S>& v, const GridCalculus& calc,
                                       Diagnostics* diag = nullptr) {
  return covariant_derivative_x(u, map_derivative(u, calc), v, calc, diag);
}

/// u_x and its covariant derivatives nabla_x^k u_x, k = 1..3.
template <class S>
struct CovariantTower {
  TangentField<S> ux;
  TangentField<S> d1;
  TangentField<S> d2;
  TangentField<S> d3;
};

/// Tower by repeated application of covariant_derivative_x.
template <class S>
CovariantTower<S> iterated_covariant_tower(const MapField<S>& u, const GridCalculus& calc, int depth = 3) {
  CovariantTower<S> t;
  t.ux = map_derivative(u, calc);
  t.d1 = covariant_derivative_x(u, t.ux, t.ux, calc);
  if (depth >= 2) t.d2 = covariant_derivative_x(u, t.ux, t.d1, calc);
  if (depth >= 3) t.d3 = covariant_derivative_x(u, t.ux, t.d2, calc);
  return t;
}

/// Sphere tower from the extrinsic closed forms
///   nabla u_x   = u_xx + |u_x|^2 u
///   nabla^2 u_x = u_xxx + 3 (u_xx, u_x) u + |u_x|^2 u_x
///   nabla^3 u_x = u_xxxx + 4 (u_xxx, u_x) u + 3 |u_xx|^2 u + 5 (u_xx, u_x) u_x
///                 + |u_x|^2 u_xx + |u_x|^4 u.
inline CovariantTower<UnitSphere> covariant_tower(const MapField<UnitSphere>& u, const GridCalculus& calc,
                                                  int depth = 3) {
  const int order = std::clamp(depth + 1, 2, 4);
  const auto d = calc.derivatives(u.points, order);
  const std::size_t n = u.size();
  CovariantTower<UnitSphere> t;
  t.ux.values = d[0];
  t.d1.values.resize(n);
  if (depth >= 2) t.d2.values.resize(n);
  if (depth >= 3) t.d3.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = u.points[i];
    const Vec3& u1 = d[0][i];
    const Vec3& u2 = d[1][i];
    const double e = dot(u1, u1);
    t.d1[i] = u2 + e * p;
    if (depth >= 2) {
      const Vec3& u3 = d[2][i];
      t.d2[i] = u3 + 3.0 * dot(u2, u1) * p + e * u1;
      if (depth >= 3) {
        const Vec3& u4 = d[3][i];
        t.d3[i] = u4 + 4.0 * dot(u3, u1) * p + 3.0 * dot(u2, u2) * p + 5.0 * dot(u2, u1) * u1 + e * u2 + e * e * p;
      }
    }
  }
  return t;
}

/// Charts have no extrinsic closed form; the tower is built iteratively.
inline CovariantTower<ConformalChart> covariant_tower(const MapField<ConformalChart>& u, const GridCalculus& calc,
                                                      int depth = 3) {
  return iterated_covariant_tower(u, calc, depth);
}

/// Gaussian curvature sampled along the map.
template <class S>
std::vector<double> curvature_along(const MapField<S>& u) {
  std::vector<double> k(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) k[i] = u.surface.curvature(u.points[i]);
  return k;
}

/// Pointwise g(V, W).
template <class S>
std::vector<double> pointwise_inner(const MapField<S>& u, const TangentField<S>& v, const TangentField<S>& w) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u.surface.inner(u.points[i], v[i], w[i]);
  return out;
}

/// Map a chart field to the sphere through the north-pole stereographic map.
inline MapField<UnitSphere> to_sphere(const MapField<ConformalChart>& z) {
  MapField<UnitSphere> u;
  u.grid = z.grid;
  u.points.reserve(z.size());
  for (const auto& p : z.points) u.points.push_back(chart_to_sphere(p));
  u.base_point = chart_to_sphere(z.base_point);
  return u;
}

inline MapField<ConformalChart> to_chart(const MapField<UnitSphere>& u, ConformalChart chart) {
  MapField<ConformalChart> z;
  z.grid = u.grid;
  z.surface = std::move(chart);
  z.points.reserve(u.size());
  for (const auto& p : u.points) z.points.push_back(sphere_to_chart(p));
  z.base_point = sphere_to_chart(u.base_point);
  return z;
}

}  // namespace hasimoto
