#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hasimoto/calculus.hpp"
#include "hasimoto/complex_field.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/flows.hpp"
#include "hasimoto/map_field.hpp"
#include "hasimoto/surface.hpp"

namespace hasimoto {

enum class TransportMethod { automatic, spectral_gauge, magnus4 };

inline std::string to_string(TransportMethod m) {
  switch (m) {
    case TransportMethod::automatic: return "automatic";
    case TransportMethod::spectral_gauge: return "spectral_gauge";
    case TransportMethod::magnus4: return "magnus4";
  }
  return "unknown";
}

/// Orthonormal frame {e, Je} along a map slice, parallel in x, anchored at the left end.
template <class S>
struct FrameField {
  using Tangent = typename S::Tangent;

  GridSpec grid;
  std::vector<Tangent> e;
  std::vector<Tangent> Je;
  Tangent e0{};
  /// Largest orthonormality violation removed by pointwise re-orthonormalisation.
  double orthonormality_defect = 0.0;
  TransportMethod method = TransportMethod::automatic;

  std::size_t size() const { return e.size(); }
};

/// Tolerance used when checking that an anchor is a unit tangent vector.
inline constexpr double anchor_tolerance = 1e-8;

/// Normalised tangential projection of e0 at u (for anchors on moving endpoints).
inline Vec3 project_anchor(const UnitSphere&, const Vec3& u, const Vec3& e0) {
  const Vec3 t = e0 - dot(e0, u) * u;
  const double n = norm(t);
  if (!(n > 1e-6)) throw DomainError("anchor vector is (nearly) normal to the sphere at the left endpoint");
  return t / n;
}

inline cplx project_anchor(const ConformalChart& chart, const cplx& z, const cplx& e0) {
  const double n = std::sqrt(chart.lambda(z)) * std::abs(e0);
  if (!(n > 0.0)) throw DomainError("anchor vector must be nonzero");
  return e0 / n;
}

namespace detail {

/// Rodrigues rotation of v about the vector omega by the angle |omega|.
inline Vec3 rotate(const Vec3& omega, const Vec3& v) {
  const double th = norm(omega);
  if (th < 1e-300) return v;
  const Vec3 k = omega / th;
  return std::cos(th) * v + std::sin(th) * cross(k, v) + (1.0 - std::cos(th)) * dot(k, v) * k;
}

/// Cubic Lagrange interpolation of f at x_i + s*dx (0 < s < 1) on a non-periodic grid.
template <class T>
std::vector<T> cubic_shift(const std::vector<T>& f, double s) {
  const int n = static_cast<int>(f.size());
  std::vector<T> out(f.size());
  for (int i = 0; i + 1 < n; ++i) {
    const int j0 = std::clamp(i - 1, 0, std::max(0, n - 4));
    const double x = static_cast<double>(i - j0) + s;
    T acc = f[0] * 0.0;
    for (int a = 0; a < 4 && j0 + a < n; ++a) {
      double w = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) w *= (x - b) / static_cast<double>(a - b);
      acc += f[static_cast<std::size_t>(j0 + a)] * w;
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  out.back() = f.back();
  return out;
}

/// Reference direction minimising max |w . u| over the slice.
inline std::pair<Vec3, double> gauge_direction(const std::vector<Vec3>& u) {
  std::vector<Vec3> candidates;
  for (int sx = -1; sx <= 1; ++sx)
    for (int sy = -1; sy <= 1; ++sy)
      for (int sz = 0; sz <= 1; ++sz) {
        if (sx == 0 && sy == 0 && sz == 0) continue;
        if (sz == 0 && (sy < 0 || (sy == 0 && sx < 0))) continue;
        candidates.push_back(normalized(Vec3{double(sx), double(sy), double(sz)}));
      }
  Vec3 best{0, 0, 1};
  double best_val = 2.0;
  for (const auto& w : candidates) {
    double m = 0.0;
    for (const auto& p : u) m = std::max(m, std::abs(dot(w, p)));
    if (m < best_val) {
      best_val = m;
      best = w;
    }
  }
  return {best, best_val};
}

inline double reorthonormalise(const std::vector<Vec3>& u, std::vector<Vec3>& e, std::vector<Vec3>& Je) {
  double worst = 0.0;
  Je.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    worst = std::max({worst, std::abs(dot(e[i], e[i]) - 1.0), std::abs(dot(e[i], u[i]))});
    e[i] = normalized(e[i] - dot(e[i], u[i]) * u[i]);
    Je[i] = cross(u[i], e[i]);
  }
  return worst;
}

}  // namespace detail

/// Parallel transport of e0 along a sphere map: nabla_x e = 0, i.e. e_x = -(e, u_x) u.
///
/// spectral_gauge (periodic grids): e = cos(phi) E + sin(phi) F with E the normalised
/// projection of a fixed direction, F = u x E and phi_x = -(E_x, F) integrated spectrally.
/// magnus4: fourth-order Magnus steps of e_x = (u x u_x) x e.
inline FrameField<UnitSphere> parallel_frame(const MapField<UnitSphere>& u, const Vec3& e0, const GridCalculus& calc,
                                             TransportMethod method = TransportMethod::automatic,
                                             Diagnostics* diag = nullptr) {
  const std::size_t n = u.size();
  if (n != calc.grid().size()) throw ConfigError("parallel_frame: map and grid sizes differ");
  const Vec3& ul = u.points.front();
  if (std::abs(norm(e0) - 1.0) > anchor_tolerance || std::abs(dot(e0, ul)) > anchor_tolerance)
    throw DomainError("parallel_frame: e0 must be a unit tangent vector at the left endpoint");
  warn_if_coarse<UnitSphere>(calc, diag);

  FrameField<UnitSphere> fr;
  fr.grid = u.grid;
  fr.e0 = e0;
  fr.e.resize(n);

  auto [w, wmax] = detail::gauge_direction(u.points);
  if (method == TransportMethod::automatic)
    method = (calc.periodic() && wmax <= 0.9) ? TransportMethod::spectral_gauge : TransportMethod::magnus4;
  if (method == TransportMethod::spectral_gauge && !calc.periodic())
    throw ConfigError("spectral_gauge transport requires a periodic grid");
  if (method == TransportMethod::spectral_gauge && wmax > 0.999)
    throw DomainError("spectral_gauge transport: no admissible reference direction for this slice");
  fr.method = method;

  if (method == TransportMethod::spectral_gauge) {
    std::vector<Vec3> E(n), F(n);
    for (std::size_t i = 0; i < n; ++i) {
      E[i] = normalized(w - dot(w, u.points[i]) * u.points[i]);
      F[i] = cross(u.points[i], E[i]);
    }
    const auto Ex = calc.derivative(E, 1);
    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) rate[i] = -dot(Ex[i], F[i]);
    const auto phi = calc.cumulative_integral(rate, Quadrature::spectral);
    const double phi0 = std::atan2(dot(e0, F[0]), dot(e0, E[0]));
    for (std::size_t i = 0; i < n; ++i) fr.e[i] = std::cos(phi0 + phi[i]) * E[i] + std::sin(phi0 + phi[i]) * F[i];
  } else {
    const auto ux = calc.derivative(u.points, 1);
    std::vector<Vec3> omega(n);
    for (std::size_t i = 0; i < n; ++i) omega[i] = cross(u.points[i], ux[i]);
    const double h = calc.grid().dx();
    const double s1 = 0.5 - std::sqrt(3.0) / 6.0;
    const double s2 = 0.5 + std::sqrt(3.0) / 6.0;
    std::vector<Vec3> w1, w2;
    if (calc.periodic()) {
      w1 = calc.shifted(omega, s1 * h);
      w2 = calc.shifted(omega, s2 * h);
    } else {
      w1 = detail::cubic_shift(omega, s1);
      w2 = detail::cubic_shift(omega, s2);
    }
    fr.e[0] = e0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Vec3 Om = (0.5 * h) * (w1[i] + w2[i]) + (std::sqrt(3.0) * h * h / 12.0) * cross(w2[i], w1[i]);
      fr.e[i + 1] = detail::rotate(Om, fr.e[i]);
    }
  }
  fr.orthonormality_defect = detail::reorthonormalise(u.points, fr.e, fr.Je);
  if (diag && fr.orthonormality_defect > 1e-10)
    diag->warn("parallel_frame: re-orthonormalisation removed a defect of " + std::to_string(fr.orthonormality_defect));
  return fr;
}

/// Parallel transport in a conformal chart: zeta_x + Gamma(z) z_x zeta = 0, solved in closed form
/// zeta = zeta_l exp(-integral Gamma z_x dx).
inline FrameField<ConformalChart> parallel_frame(const MapField<ConformalChart>& z, const cplx& e0,
                                                 const GridCalculus& calc,
                                                 TransportMethod method = TransportMethod::automatic,
                                                 Diagnostics* diag = nullptr) {
  (void)method;
  const std::size_t n = z.size();
  if (n != calc.grid().size()) throw ConfigError("parallel_frame: map and grid sizes differ");
  const auto& chart = z.surface;
  if (std::abs(chart.inner(z.points.front(), e0, e0) - 1.0) > anchor_tolerance)
    throw DomainError("parallel_frame: e0 must have unit length at the left endpoint");
  warn_if_coarse<ConformalChart>(calc, diag);
  const auto zx = calc.derivative(z.points, 1);
  std::vector<cplx> rate(n);
  for (std::size_t i = 0; i < n; ++i) rate[i] = chart.christoffel(z.points[i]) * zx[i];
  const auto C = calc.cumulative_integral(rate, calc.periodic() ? Quadrature::spectral : Quadrature::corrected_trapezoid);
  FrameField<ConformalChart> fr;
  fr.grid = z.grid;
  fr.e0 = e0;
  fr.method = TransportMethod::automatic;
  fr.e.resize(n);
  fr.Je.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx e = e0 * std::exp(-C[i]);
    const double len2 = chart.inner(z.points[i], e, e);
    fr.orthonormality_defect = std::max(fr.orthonormality_defect, std::abs(len2 - 1.0));
    e /= std::sqrt(len2);
    fr.e[i] = e;
    fr.Je[i] = chart.J(z.points[i], e);
  }
  if (diag && fr.orthonormality_defect > 1e-10)
    diag->warn("parallel_frame: re-normalisation removed a defect of " + std::to_string(fr.orthonormality_defect));
  return fr;
}

/// max over the grid of |g(e,e) - 1| and |g(e, Je)|.
template <class S>
double frame_orthonormality(const MapField<S>& u, const FrameField<S>& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& p = u.points[i];
    worst = std::max({worst, std::abs(u.surface.inner(p, f.e[i], f.e[i]) - 1.0), std::abs(u.surface.inner(p, f.e[i], f.Je[i])),
                      std::abs(u.surface.inner(p, f.Je[i], f.Je[i]) - 1.0)});
  }
  if constexpr (std::is_same_v<S, UnitSphere>) {
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(dot(f.e[i], u.points[i])));
  }
  return worst;
}

/// Largest |nabla_x e| using a local five-point stencil for e_x, interior points only.
/// The stencil never wraps, so frames with holonomy on periodic grids are measured correctly.
template <class S>
double parallelism_residual(const MapField<S>& u, const FrameField<S>& f, const GridCalculus& calc) {
  const auto ux = calc.derivative(u.points, 1);
  const double h = u.grid.dx();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < u.size(); ++i) {
    const auto ex = (f.e[i - 2] - 8.0 * f.e[i - 1] + 8.0 * f.e[i + 1] - f.e[i + 2]) / (12.0 * h);
    const auto v = ex + u.surface.connection(u.points[i], ux[i], f.e[i]);
    worst = std::max(worst, std::sqrt(std::max(0.0, u.surface.inner(u.points[i], v, v))));
  }
  return worst;
}

/// Frame components g(V, e) + i g(V, Je).
template <class S>
std::vector<cplx> frame_components(const MapField<S>& u, const FrameField<S>& f,
                                   const std::vector<typename S::Tangent>& v) {
  std::vector<cplx> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = {u.surface.inner(u.points[i], v[i], f.e[i]), u.surface.inner(u.points[i], v[i], f.Je[i])};
  return out;
}

/// q with u_x = q1 e + q2 Je.
template <class S>
ComplexField hasimoto_q(const MapField<S>& u, const FrameField<S>& f, const GridCalculus& calc) {
  return {u.grid, frame_components(u, f, map_derivative(u, calc).values)};
}

/// p with u_t = p1 e + p2 Je.
template <class S>
ComplexField hasimoto_p(const MapField<S>& u, const TangentField<S>& ut, const FrameField<S>& f) {
  if (ut.size() != u.size()) throw ConfigError("hasimoto_p: u_t and map sizes differ");
  return {u.grid, frame_components(u, f, ut.values)};
}

/// q and its x-derivatives from frame components of the covariant tower:
/// d^k q / dx^k = g(nabla^k u_x, e) + i g(nabla^k u_x, Je) because the frame is parallel.
/// Unlike differentiating q on the grid, this stays valid when q is not periodic.
template <class S>
ComplexJet q_jet(const MapField<S>& u, const FrameField<S>& f, const GridCalculus& calc, int order) {
  if (order < 0 || order > 4) throw UnsupportedError("q_jet order must be in 0..4");
  const auto t = covariant_tower(u, calc, std::clamp(order, 1, 3));
  ComplexJet j;
  j.grid = u.grid;
  j.order = order;
  j.d[0] = frame_components(u, f, t.ux.values);
  if (order >= 1) j.d[1] = frame_components(u, f, t.d1.values);
  if (order >= 2) j.d[2] = frame_components(u, f, t.d2.values);
  if (order >= 3) j.d[3] = frame_components(u, f, t.d3.values);
  if (order >= 4) j.d[4] = frame_components(u, f, covariant_derivative_x(u, t.ux, t.d3, calc).values);
  return j;
}

/// p = a q_xx + i q_x + b |q|^2 q.
inline ComplexField p_from_q_third(const ComplexJet& j, double a, double b) {
  j.require(a != 0.0 ? 2 : 1);
  ComplexField p{j.grid, std::vector<cplx>(j.size())};
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const cplx q = j[0][i];
    cplx v = I * j[1][i] + b * std::norm(q) * q;
    if (a != 0.0) v += a * j[2][i];
    p[i] = v;
  }
  return p;
}

inline ComplexField p_from_q_third(const ComplexField& q, double a, double b, const GridCalculus& calc) {
  return p_from_q_third(make_jet(q, calc, 2), a, b);
}

/// -i p = q_x - a q_xxx + b |q|^2 q_x + (c/2) (|q|^2)_x q.
inline ComplexField p_from_q_fourth(const ComplexJet& j, double a, double b, double c) {
  j.require(a != 0.0 ? 3 : 1);
  ComplexField p{j.grid, std::vector<cplx>(j.size())};
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const cplx q = j[0][i];
    const cplx q1 = j[1][i];
    const double m2x = 2.0 * std::real(std::conj(q) * q1);
    cplx v = q1 + b * std::norm(q) * q1 + 0.5 * c * m2x * q;
    if (a != 0.0) v -= a * j[3][i];
    p[i] = I * v;
  }
  return p;
}

inline ComplexField p_from_q_fourth(const ComplexField& q, double a, double b, double c, const GridCalculus& calc) {
  return p_from_q_fourth(make_jet(q, calc, 3), a, b, c);
}

/// Frame rotation rate alpha(x) with alpha_x = -kappa Im(conj(q) p) and alpha(x_left) = A.
struct PhaseProfile {
  GridSpec grid;
  std::vector<double> alpha;
  double A = 0.0;
};

inline PhaseProfile alpha_profile(const ComplexField& q, const ComplexField& p, const std::vector<double>& kappa,
                                  double A, const GridCalculus& calc, Quadrature quad = Quadrature::trapezoid) {
  if (q.size() != p.size() || q.size() != kappa.size()) throw ConfigError("alpha_profile: field sizes differ");
  std::vector<double> rate(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) rate[i] = -kappa[i] * std::imag(std::conj(q[i]) * p[i]);
  auto alpha = calc.cumulative_integral(rate, quad);
  for (auto& v : alpha) v += A;
  return {q.grid, std::move(alpha), A};
}

/// g(e_t + Gamma(u)(u_t, e), Je): the frame rotation rate for given time derivatives.
template <class S>
double rotation_rate(const S& surface, const typename S::Point& u, const typename S::Tangent& ut,
                     const typename S::Tangent& e, const typename S::Tangent& et, const typename S::Tangent& Je) {
  const auto v = et + surface.connection(u, ut, e);
  return surface.inner(u, v, Je);
}

/// Rotation rate at x_left from two frame slices a time dt apart (forward difference).
template <class S>
double left_rotation_rate(const MapField<S>& u0, const FrameField<S>& f0, const MapField<S>& u1,
                          const FrameField<S>& f1, double dt) {
  if (dt == 0.0) throw ConfigError("estimate_A: time step must be nonzero");
  const auto ut = (u1.points.front() - u0.points.front()) / dt;
  const auto et = (f1.e.front() - f0.e.front()) / dt;
  return rotation_rate(u0.surface, u0.points.front(), ut, f0.e.front(), et, f0.Je.front());
}

/// Rotation rate at x_left from five equally spaced slices centred on index 2.
template <class S>
double left_rotation_rate5(std::span<const MapField<S>* const> u, std::span<const FrameField<S>* const> f, double dt) {
  if (u.size() != 5 || f.size() != 5) throw ConfigError("left_rotation_rate5 needs five slices");
  if (dt == 0.0) throw ConfigError("estimate_A: time step must be nonzero");
  auto d5 = [dt](const auto& m2, const auto& m1, const auto& p1, const auto& p2) {
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dt);
  };
  const auto ut = d5(u[0]->points.front(), u[1]->points.front(), u[3]->points.front(), u[4]->points.front());
  const auto et = d5(f[0]->e.front(), f[1]->e.front(), f[3]->e.front(), f[4]->e.front());
  return rotation_rate(u[2]->surface, u[2]->points.front(), ut, f[2]->e.front(), et, f[2]->Je.front());
}

/// Boundary term of the third-order phase: alpha = A + kappa H - int kappa_x H with
/// H = -|q|^2/2 + a Im(q conj(q_x)); the constant carried by the reduced equation is
/// A = alpha(x_left) - kappa_l H_l.
inline double gauge_boundary_third(cplx q, cplx q1, double a, double kappa) {
  return kappa * (-0.5 * std::norm(q) + a * std::imag(q * std::conj(q1)));
}

/// Fourth-order analogue: A = alpha(x_left) + kappa_l (F_l - a G_l) with
/// F = |q|^2/2 + (b+c)/4 |q|^4 and G = Re(conj(q) q_xx) - |q_x|^2/2.
inline double gauge_boundary_fourth(cplx q, cplx q1, cplx q2, double a, double b, double c, double kappa) {
  const double m2 = std::norm(q);
  const double F = 0.5 * m2 + 0.25 * (b + c) * m2 * m2;
  const double G = std::real(std::conj(q) * q2) - 0.5 * std::norm(q1);
  return -kappa * (F - a * G);
}

inline double gauge_boundary(const ComplexJet& j, const FlowParams& p, double kappa_left) {
  if (p.kind == FlowKind::fourth_order) {
    j.require(p.a != 0.0 ? 2 : 1);
    return gauge_boundary_fourth(j[0][0], j[1][0], p.a != 0.0 ? j[2][0] : cplx{}, p.a, p.b, p.c, kappa_left);
  }
  j.require(1);
  return gauge_boundary_third(j[0][0], j[1][0], p.a, kappa_left);
}

/// Gauge constant A(t) from two frame slices: left rotation rate minus the local boundary term.
/// Zero when the data are flat at the left end and the frame does not move there.
template <class S>
double estimate_A(const MapField<S>& u0, const FrameField<S>& f0, const MapField<S>& u1, const FrameField<S>& f1,
                  double dt, const FlowParams& params, const GridCalculus& calc) {
  const double alpha_left = left_rotation_rate(u0, f0, u1, f1, dt);
  const auto jet = q_jet(u0, f0, calc, params.kind == FlowKind::fourth_order && params.a != 0.0 ? 2 : 1);
  return alpha_left - gauge_boundary(jet, params, u0.surface.curvature(u0.points.front()));
}

/// Q = q exp(i int_0^t A) with A sampled at `times` (trapezoid, linear between samples).
inline ComplexField gauge_phase_removal(const ComplexField& q, std::span<const double> times, std::span<const double> A,
                                        double t) {
  if (times.size() != A.size()) throw ConfigError("gauge_phase_removal: history sizes differ");
  double phase = 0.0;
  if (!times.empty()) {
    if (t < times.front() - 1e-14 || t > times.back() + 1e-12 * std::max(1.0, std::abs(times.back())))
      throw ConfigError("gauge_phase_removal: t outside the sampled history");
    double prev_t = 0.0;
    double prev_A = A.front();
    if (times.front() > 0.0) phase += A.front() * times.front();
    prev_t = times.front();
    for (std::size_t i = 1; i < times.size() && prev_t < t; ++i) {
      const double t1 = std::min(times[i], t);
      const double A1 = prev_A + (A[i] - prev_A) * (t1 - prev_t) / (times[i] - prev_t);
      phase += 0.5 * (prev_A + A1) * (t1 - prev_t);
      prev_t = times[i];
      prev_A = A[i];
    }
  }
  ComplexField Q = q;
  const cplx rot = std::polar(1.0, phase);
  for (auto& v : Q.values) v *= rot;
  return Q;
}

/// Constant-A convenience form.
inline ComplexField gauge_phase_removal(const ComplexField& q, double A, double t) {
  ComplexField Q = q;
  const cplx rot = std::polar(1.0, A * t);
  for (auto& v : Q.values) v *= rot;
  return Q;
}

// ---------------------------------------------------------------------------
// Frenet data and the classical transform
// ---------------------------------------------------------------------------

struct FrenetData {
  std::vector<Vec3> T, n, b;
  std::vector<double> kappa, tau;
  std::vector<bool> defined;  ///< false where the curvature is below the threshold

  std::size_t undefined_count() const {
    return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), false));
  }
};

inline constexpr double frenet_epsilon = 1e-8;

inline FrenetData frenet_frame(const FilamentState& X, const GridCalculus& calc, double eps = frenet_epsilon) {
  const auto d = filament_derivatives(X, calc, 3);
  const std::size_t n = X.size();
  FrenetData fd;
  fd.T = d[0];
  fd.n.assign(n, Vec3{});
  fd.b.assign(n, Vec3{});
  fd.kappa.assign(n, 0.0);
  fd.tau.assign(n, 0.0);
  fd.defined.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = norm(d[1][i]);
    fd.kappa[i] = k;
    if (k <= eps) continue;
    fd.defined[i] = true;
    fd.n[i] = d[1][i] / k;
    fd.b[i] = cross(d[0][i], fd.n[i]);
    fd.tau[i] = dot(cross(d[0][i], d[1][i]), d[2][i]) / (k * k);
  }
  if (fd.undefined_count() == n) throw FrameUndefinedError("frenet_frame: curvature vanishes on the whole filament");
  return fd;
}

/// psi = kappa exp(i int_{x_left}^x tau) with cumulative trapezoid.
inline ComplexField classical_hasimoto(const FilamentState& X, const GridCalculus& calc, double eps = frenet_epsilon) {
  const auto fd = frenet_frame(X, calc, eps);
  if (fd.undefined_count() > 0)
    throw FrameUndefinedError("classical_hasimoto: curvature vanishes at " + std::to_string(fd.undefined_count()) +
                              " grid points; use the parallel-frame transform");
  const auto theta = calc.cumulative_integral(fd.tau, Quadrature::trapezoid);
  ComplexField psi{X.grid, std::vector<cplx>(X.size())};
  for (std::size_t i = 0; i < X.size(); ++i) psi[i] = std::polar(fd.kappa[i], theta[i]);
  return psi;
}

/// Tangent indicatrix u = X_x as a sphere map (normalised).
inline MapField<UnitSphere> tangent_map(const FilamentState& X, const GridCalculus& calc) {
  MapField<UnitSphere> u;
  u.grid = X.grid;
  u.points = filament_tangent(X, calc);
  for (auto& p : u.points) p = normalized(p);
  u.base_point = u.points.front();
  return u;
}

}  // namespace hasimoto
