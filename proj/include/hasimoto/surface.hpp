#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>

#include "hasimoto/errors.hpp"
#include "hasimoto/grid.hpp"
#include "hasimoto/vec3.hpp"

namespace hasimoto {

/// The unit two-sphere embedded in R^3 with the induced metric and J_u V = u x V.
struct UnitSphere {
  using Point = Vec3;
  using Tangent = Vec3;

  static constexpr const char* name = "sphere";

  /// Allowed |(V, u)| before a vector is rejected as non-tangent.
  double tangency_tolerance = 1e-8;

  Tangent apply_J(const Point& u, const Tangent& v) const {
    if (std::abs(dot(u, v)) > tangency_tolerance * std::max(1.0, norm(v)))
      throw DomainError("apply_J: vector is not tangent to the sphere at the base point");
    return cross(u, v);
  }

  /// J without the tangency check, for hot loops on already-tangent data.
  static Tangent J(const Point& u, const Tangent& v) { return cross(u, v); }

  static double inner(const Point&, const Tangent& v, const Tangent& w) { return dot(v, w); }

  static double curvature(const Point&) { return 1.0; }

  static Point project(const Point& u) { return normalized(u); }

  static Tangent project_tangent(const Point& u, const Tangent& v) { return v - dot(v, u) * u; }

  /// Christoffel part of the covariant derivative along a curve with velocity
  /// u_x: nabla_x V = V_x + (V, u_x) u.
  static Tangent connection(const Point& u, const Tangent& ux, const Tangent& v) { return dot(v, ux) * u; }

  static double point_distance(const Point& a, const Point& b) { return norm(a - b); }

  static double membership_defect(const Point& u) { return std::abs(norm(u) - 1.0); }

  static Point zero_tangent() { return {}; }
};

/// Conformal metric density lambda(z, zbar) > 0 for g = lambda |dz|^2, with
/// analytic derivatives d/dz lambda and d^2/(dz dzbar) lambda.
struct MetricDensity {
  std::string name;
  std::function<double(cplx)> value;
  std::function<cplx(cplx)> d_z;
  std::function<double(cplx)> d_z_dzbar;
};

/// The round unit-sphere metric in the stereographic chart: 4 / (1 + |z|^2)^2.
inline MetricDensity round_metric() {
  MetricDensity m;
  m.name = "round";
  m.value = [](cplx z) {
    const double s = 1.0 + std::norm(z);
    return 4.0 / (s * s);
  };
  m.d_z = [](cplx z) {
    const double s = 1.0 + std::norm(z);
    return -8.0 * std::conj(z) / (s * s * s);
  };
  m.d_z_dzbar = [](cplx z) {
    const double r2 = std::norm(z);
    const double s = 1.0 + r2;
    return (16.0 * r2 - 8.0) / (s * s * s * s);
  };
  return m;
}

/// Round metric times (1 + eps exp(-|z|^2)); nonconstant curvature for eps != 0.
inline MetricDensity perturbed_round_metric(double eps) {
  if (!(eps > -1.0)) throw ConfigError("perturbed metric requires eps > -1 for positivity");
  const MetricDensity round = round_metric();
  MetricDensity m;
  m.name = "perturbed";
  m.value = [round, eps](cplx z) { return round.value(z) * (1.0 + eps * std::exp(-std::norm(z))); };
  m.d_z = [round, eps](cplx z) {
    const double g = std::exp(-std::norm(z));
    const double P = 1.0 + eps * g;
    const cplx Pz = -eps * std::conj(z) * g;
    return round.d_z(z) * P + round.value(z) * Pz;
  };
  m.d_z_dzbar = [round, eps](cplx z) {
    const double r2 = std::norm(z);
    const double g = std::exp(-r2);
    const double P = 1.0 + eps * g;
    const cplx Pz = -eps * std::conj(z) * g;
    const double Pzzbar = eps * g * (r2 - 1.0);
    const cplx Rz = round.d_z(z);
    return round.d_z_dzbar(z) * P + 2.0 * std::real(Rz * std::conj(Pz)) + round.value(z) * Pzzbar;
  };
  return m;
}

/// A Riemann surface seen through one conformal chart z = u^1 + i u^2.
///
/// Tangent vectors are complex numbers v = V^1 + i V^2; g(V, W) = lambda Re(v conj w).
/// J multiplies by i * orientation. orientation = -1 reproduces J_u = u x on the
/// unit sphere through the north-pole stereographic map z = (u1 + i u2)/(1 - u3),
/// which reverses orientation with respect to the outward normal.
struct ConformalChart {
  using Point = cplx;
  using Tangent = cplx;

  static constexpr const char* name = "chart";

  std::shared_ptr<const MetricDensity> metric;
  int orientation = +1;
  double max_radius = 1e3;

  ConformalChart() : metric(std::make_shared<MetricDensity>(round_metric())) {}
  explicit ConformalChart(MetricDensity m, int orient = +1, double radius = 1e3)
      : metric(std::make_shared<MetricDensity>(std::move(m))), orientation(orient), max_radius(radius) {
    if (orientation != 1 && orientation != -1) throw ConfigError("chart orientation must be +1 or -1");
  }

  double lambda(const Point& z) const {
    if (!(std::abs(z) <= max_radius)) throw RangeError("chart point left the working region");
    const double l = metric->value(z);
    if (!(l > 0.0)) throw DomainError("metric density must be positive");
    return l;
  }

  /// (log lambda)_z, the only Christoffel symbol of a conformal metric.
  cplx christoffel(const Point& z) const { return metric->d_z(z) / lambda(z); }

  Tangent apply_J(const Point&, const Tangent& v) const { return J(cplx{}, v); }
  Tangent J(const Point&, const Tangent& v) const { return cplx(0.0, orientation) * v; }

  double inner(const Point& z, const Tangent& v, const Tangent& w) const {
    return lambda(z) * std::real(v * std::conj(w));
  }

  /// kappa = -(2 / lambda) d_z d_zbar log(lambda).
  double curvature(const Point& z) const {
    const double l = lambda(z);
    const cplx lz = metric->d_z(z);
    const double log_zzbar = metric->d_z_dzbar(z) / l - std::norm(lz) / (l * l);
    return -2.0 / l * log_zzbar;
  }

  static Point project(const Point& z) { return z; }
  static Tangent project_tangent(const Point&, const Tangent& v) { return v; }

  Tangent connection(const Point& z, const Tangent& zx, const Tangent& v) const {
    return christoffel(z) * zx * v;
  }

  static double point_distance(const Point& a, const Point& b) { return std::abs(a - b); }

  double membership_defect(const Point& z) const {
    lambda(z);
    return 0.0;
  }

  static Point zero_tangent() { return {}; }
};

template <class S>
double gaussian_curvature(const S& surface, const typename S::Point& u) {
  return surface.curvature(u);
}

template <class S>
typename S::Tangent apply_J(const S& surface, const typename S::Point& u, const typename S::Tangent& v) {
  return surface.apply_J(u, v);
}

template <class S>
double metric_inner(const S& surface, const typename S::Point& u, const typename S::Tangent& v,
                    const typename S::Tangent& w) {
  return surface.inner(u, v, w);
}

/// North-pole stereographic map z -> u; z = 0 is the south pole.
inline Vec3 chart_to_sphere(cplx z) {
  const double r2 = std::norm(z);
  const double s = 1.0 + r2;
  return {2.0 * z.real() / s, 2.0 * z.imag() / s, (r2 - 1.0) / s};
}

/// Inverse of chart_to_sphere, z = (u1 + i u2) / (1 - u3).
inline cplx sphere_to_chart(const Vec3& u, double pole_tolerance = 1e-12) {
  const double d = 1.0 - u.z;
  if (d <= pole_tolerance) throw PoleError("sphere_to_chart: point is at the projection pole (0,0,1)");
  return {u.x / d, u.y / d};
}

/// Differential of chart_to_sphere at z applied to the chart vector v.
inline Vec3 chart_pushforward(cplx z, cplx v) {
  const double x = z.real();
  const double y = z.imag();
  const double s = 1.0 + x * x + y * y;
  const double s2 = s * s;
  const Vec3 dx{2.0 / s - 4.0 * x * x / s2, -4.0 * x * y / s2, 4.0 * x / s2};
  const Vec3 dy{-4.0 * x * y / s2, 2.0 / s - 4.0 * y * y / s2, 4.0 * y / s2};
  return v.real() * dx + v.imag() * dy;
}

}  // namespace hasimoto
