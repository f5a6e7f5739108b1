#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "hasimoto/calculus.hpp"
#include "hasimoto/complex_field.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/flows.hpp"
#include "hasimoto/map_field.hpp"

namespace hasimoto {

enum class ReducedKind { nls, hirota, fourth_reduced, t3rd, t4th, schrodinger_reduced };

inline std::string to_string(ReducedKind k) {
  switch (k) {
    case ReducedKind::nls: return "nls";
    case ReducedKind::hirota: return "hirota";
    case ReducedKind::fourth_reduced: return "fourth_reduced";
    case ReducedKind::t3rd: return "t3rd";
    case ReducedKind::t4th: return "t4th";
    case ReducedKind::schrodinger_reduced: return "schrodinger_reduced";
  }
  return "unknown";
}

inline ReducedKind reduced_kind_from_string(const std::string& s) {
  for (auto k : {ReducedKind::nls, ReducedKind::hirota, ReducedKind::fourth_reduced, ReducedKind::t3rd,
                 ReducedKind::t4th, ReducedKind::schrodinger_reduced})
    if (to_string(k) == s) return k;
  throw ConfigError("reduced.kind: unknown reduced kind '" + s + "'");
}

enum class KappaMode { constant, field };

struct ReducedParams {
  ReducedKind kind = ReducedKind::nls;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double C1 = 0.0;
  double Cb = 0.0;
  KappaMode kappa_mode = KappaMode::constant;
  double kappa0 = 1.0;
  bool nonlocal = false;
  /// Quadrature for the nonlocal brackets.
  Quadrature quadrature = Quadrature::trapezoid;

  static ReducedParams nls() { return {}; }
  static ReducedParams hirota(double a) {
    ReducedParams p;
    p.kind = ReducedKind::hirota;
    p.a = a;
    return p;
  }
  static ReducedParams fourth_reduced(double C1, double Cb) {
    ReducedParams p;
    p.kind = ReducedKind::fourth_reduced;
    p.C1 = C1;
    p.Cb = Cb;
    return p;
  }
  static ReducedParams t3rd(double a, double b, double kappa0 = 1.0) {
    ReducedParams p;
    p.kind = ReducedKind::t3rd;
    p.a = a;
    p.b = b;
    p.kappa0 = kappa0;
    return p;
  }
  static ReducedParams t4th(double a, double b, double c, double kappa0 = 1.0) {
    ReducedParams p;
    p.kind = ReducedKind::t4th;
    p.a = a;
    p.b = b;
    p.c = c;
    p.kappa0 = kappa0;
    return p;
  }
  static ReducedParams schrodinger_reduced(double kappa0 = 1.0) {
    ReducedParams p;
    p.kind = ReducedKind::schrodinger_reduced;
    p.kappa0 = kappa0;
    return p;
  }

  /// Reduced counterpart of a geometric map flow.
  static ReducedParams from_flow(const FlowParams& f) {
    switch (f.kind) {
      case FlowKind::schrodinger_map: return schrodinger_reduced();
      case FlowKind::third_order: return t3rd(f.a, f.b);
      case FlowKind::fourth_order: return t4th(f.a, f.b, f.c);
      default: throw ConfigError("no reduced equation for filament flow kinds");
    }
  }

  ReducedParams with_field(Quadrature q = Quadrature::trapezoid) const {
    ReducedParams p = *this;
    p.kappa_mode = KappaMode::field;
    p.nonlocal = true;
    p.quadrature = q;
    return p;
  }

  void validate() const {
    if (nonlocal && kappa_mode == KappaMode::constant)
      throw ConfigError("nonlocal terms require kappa_mode = field (constant curvature makes them vanish)");
    for (double v : {a, b, c, C1, Cb, kappa0})
      if (!std::isfinite(v)) throw ConfigError("reduced coefficients must be finite");
  }

  int spatial_order() const {
    switch (kind) {
      case ReducedKind::nls:
      case ReducedKind::schrodinger_reduced: return 2;
      case ReducedKind::hirota:
      case ReducedKind::t3rd: return a != 0.0 ? 3 : 2;
      case ReducedKind::fourth_reduced: return C1 != 0.0 ? 4 : 2;
      case ReducedKind::t4th: return a != 0.0 ? 4 : 2;
    }
    return 2;
  }
};

/// Gaussian curvature sampled along a map slice and its x-derivative.
struct CurvatureTrace {
  std::vector<double> kappa;
  std::vector<double> kappa_x;
};

template <class S>
CurvatureTrace curvature_trace(const MapField<S>& u, const GridCalculus& calc) {
  CurvatureTrace t;
  t.kappa = curvature_along(u);
  t.kappa_x = calc.derivative(t.kappa, 1);
  return t;
}

/// Cumulative integral from x_left (first entry 0).
template <class T>
std::vector<T> nonlocal_accumulate(const std::vector<T>& integrand, const GridCalculus& calc,
                                   Quadrature q = Quadrature::trapezoid) {
  return calc.cumulative_integral(integrand, q);
}

template <class T>
std::vector<T> nonlocal_accumulate(const std::vector<T>& integrand, const GridSpec& grid) {
  return GridCalculus(grid).cumulative_integral(integrand, Quadrature::trapezoid);
}

namespace detail {

inline constexpr cplx I{0.0, 1.0};

inline void check_jet(const ComplexJet& j, int order) {
  j.require(order);
  for (int k = 0; k <= order; ++k)
    if (j[k].size() != j.size()) throw ConfigError("jet components have inconsistent sizes");
}

struct KappaView {
  const CurvatureTrace* trace;
  double k0;
  double operator[](std::size_t i) const { return trace ? trace->kappa[i] : k0; }
};

inline KappaView kappa_view(const ReducedParams& p, const CurvatureTrace* trace, std::size_t n) {
  if (p.kappa_mode == KappaMode::field) {
    if (!trace) throw ConfigError("kappa_mode = field requires a curvature trace sampled along u");
    if (trace->kappa.size() != n || (p.nonlocal && trace->kappa_x.size() != n))
      throw ConfigError("curvature trace length does not match the field");
    return {trace, p.kappa0};
  }
  return {nullptr, p.kappa0};
}

}  // namespace detail

/// i psi_xx + (i/2) |psi|^2 psi.
inline ComplexField rhs_nls(const ComplexJet& j) {
  detail::check_jet(j, 2);
  ComplexField out{j.grid, std::vector<cplx>(j.size())};
  for (std::size_t i = 0; i < j.size(); ++i) {
    const cplx q = j[0][i];
    out[i] = detail::I * j[2][i] + 0.5 * detail::I * std::norm(q) * q;
  }
  return out;
}

/// NLS plus a {psi_xxx + (3/2) |psi|^2 psi_x}.
inline ComplexField rhs_hirota(const ComplexJet& j, double a) {
  auto out = rhs_nls(j);
  if (a == 0.0) return out;
  detail::check_jet(j, 3);
  for (std::size_t i = 0; i < j.size(); ++i) out[i] += a * (j[3][i] + 1.5 * std::norm(j[0][i]) * j[1][i]);
  return out;
}

/// NLS plus the elliptic-core terms
///   -i C1 {psi_xxxx + (3/2)(|psi|^2 psi_xx + psi_x^2 conj(psi)) + ((3/8)|psi|^4 + (1/2)(|psi|^2)_xx) psi}
///   + i (Cb + C1/2) {(|psi|^2 psi)_xx + (3/4)|psi|^4 psi},
/// with the product derivatives expanded into monomials.
inline ComplexField rhs_fourth_reduced(const ComplexJet& j, double C1, double Cb) {
  auto out = rhs_nls(j);
  if (C1 == 0.0 && Cb == 0.0) return out;
  detail::check_jet(j, C1 != 0.0 ? 4 : 2);
  const cplx I = detail::I;
  const double s = Cb + 0.5 * C1;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const cplx q = j[0][i], q1 = j[1][i], q2 = j[2][i];
    const cplx qb = std::conj(q), q2b = std::conj(q2);
    const double m2 = std::norm(q);
    const double m4 = m2 * m2;
    const double m2xx = 2.0 * std::real(q2 * qb) + 2.0 * std::norm(q1);
    const cplx cubic_xx = 2.0 * qb * q1 * q1 + 2.0 * m2 * q2 + 4.0 * q * std::norm(q1) + q * q * q2b;
    cplx v = s * I * (cubic_xx + 0.75 * m4 * q);
    if (C1 != 0.0) {
      const cplx q4 = j[4][i];
      v -= C1 * I * (q4 + 1.5 * (m2 * q2 + q1 * q1 * qb) + (0.375 * m4 + 0.5 * m2xx) * q);
    }
    out[i] += v;
  }
  return out;
}

/// General third-order reduction with curvature kappa(u):
///   q_t = a q_xxx + i q_xx + (a kappa/2 + 2b)|q|^2 q_x - (a kappa/2 - b) q^2 conj(q_x)
///         + i a [int kappa_x Im(q conj(q_x))] q - (i/2)[int kappa_x |q|^2] q + (i/2) kappa |q|^2 q - i A q.
inline ComplexField rhs_t3rd(const ComplexJet& j, const ReducedParams& p, const CurvatureTrace* trace = nullptr,
                             double A = 0.0) {
  p.validate();
  detail::check_jet(j, p.a != 0.0 ? 3 : 2);
  const std::size_t n = j.size();
  const auto kap = detail::kappa_view(p, trace, n);
  const cplx I = detail::I;
  std::vector<cplx> nonlocal(n, cplx{});
  if (p.nonlocal) {
    std::vector<double> n1(n), n2(n);
    for (std::size_t i = 0; i < n; ++i) {
      n1[i] = trace->kappa_x[i] * std::imag(j[0][i] * std::conj(j[1][i]));
      n2[i] = trace->kappa_x[i] * std::norm(j[0][i]);
    }
    const GridCalculus calc(j.grid);
    const auto N1 = calc.cumulative_integral(n1, p.quadrature);
    const auto N2 = calc.cumulative_integral(n2, p.quadrature);
    for (std::size_t i = 0; i < n; ++i) nonlocal[i] = I * (p.a * N1[i] - 0.5 * N2[i]);
  }
  ComplexField out{j.grid, std::vector<cplx>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const cplx q = j[0][i], q1 = j[1][i];
    const double k = kap[i];
    const double m2 = std::norm(q);
    cplx v = I * j[2][i] + (0.5 * p.a * k + 2.0 * p.b) * m2 * q1 - (0.5 * p.a * k - p.b) * q * q * std::conj(q1) +
             0.5 * I * k * m2 * q + nonlocal[i] * q - I * A * q;
    if (p.a != 0.0) v += p.a * j[3][i];
    out[i] = v;
  }
  return out;
}

/// General fourth-order reduction with curvature kappa(u):
///   q_t = -i a q_xxxx + i q_xx + i(b + c/2 - a kappa/2)|q|^2 q_xx + i(c/2 - a kappa/2) q^2 conj(q_xx)
///         + i(b + c/2) conj(q) q_x^2 + i(b + 3c/2 + a kappa/2) q |q_x|^2 + (i/2) kappa |q|^2 q
///         + i (b+c)/4 kappa |q|^4 q
///         - i [int kappa_x {|q|^2/2 + (b+c)/4 |q|^4 + (a/2)|q_x|^2 - (a/2) q_xx conj(q) - (a/2) conj(q_xx) q}] q
///         - i A q.
inline ComplexField rhs_t4th(const ComplexJet& j, const ReducedParams& p, const CurvatureTrace* trace = nullptr,
                             double A = 0.0) {
  p.validate();
  detail::check_jet(j, p.a != 0.0 ? 4 : 2);
  const std::size_t n = j.size();
  const auto kap = detail::kappa_view(p, trace, n);
  const cplx I = detail::I;
  const double a = p.a, b = p.b, c = p.c;
  std::vector<double> N(n, 0.0);
  if (p.nonlocal) {
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx q = j[0][i], q1 = j[1][i], q2 = j[2][i];
      const double m2 = std::norm(q);
      integrand[i] = trace->kappa_x[i] * (0.5 * m2 + 0.25 * (b + c) * m2 * m2 + 0.5 * a * std::norm(q1) -
                                          a * std::real(q2 * std::conj(q)));
    }
    N = GridCalculus(j.grid).cumulative_integral(integrand, p.quadrature);
  }
  ComplexField out{j.grid, std::vector<cplx>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const cplx q = j[0][i], q1 = j[1][i], q2 = j[2][i];
    const double k = kap[i];
    const double m2 = std::norm(q);
    cplx v = I * q2 + I * (b + 0.5 * c - 0.5 * a * k) * m2 * q2 + I * (0.5 * c - 0.5 * a * k) * q * q * std::conj(q2) +
             I * (b + 0.5 * c) * std::conj(q) * q1 * q1 + I * (b + 1.5 * c + 0.5 * a * k) * q * std::norm(q1) +
             0.5 * I * k * m2 * q + 0.25 * I * (b + c) * k * m2 * m2 * q - I * N[i] * q - I * A * q;
    if (a != 0.0) v -= I * a * j[4][i];
    out[i] = v;
  }
  return out;
}

/// q_t = i q_xx + (i/2) kappa |q|^2 q - (i/2)[int |q|^2 kappa_x] q.
inline ComplexField rhs_schrodinger_reduced(const ComplexJet& j, const ReducedParams& p,
                                            const CurvatureTrace* trace = nullptr, double A = 0.0) {
  p.validate();
  detail::check_jet(j, 2);
  const std::size_t n = j.size();
  const auto kap = detail::kappa_view(p, trace, n);
  const cplx I = detail::I;
  std::vector<double> N(n, 0.0);
  if (p.nonlocal) {
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) integrand[i] = trace->kappa_x[i] * std::norm(j[0][i]);
    N = GridCalculus(j.grid).cumulative_integral(integrand, p.quadrature);
  }
  ComplexField out{j.grid, std::vector<cplx>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const cplx q = j[0][i];
    out[i] = I * j[2][i] + 0.5 * I * kap[i] * std::norm(q) * q - 0.5 * I * N[i] * q - I * A * q;
  }
  return out;
}

/// Dispatch on p.kind.
inline ComplexField rhs_reduced(const ComplexJet& j, const ReducedParams& p, const CurvatureTrace* trace = nullptr,
                                double A = 0.0) {
  switch (p.kind) {
    case ReducedKind::nls: return rhs_nls(j);
    case ReducedKind::hirota: return rhs_hirota(j, p.a);
    case ReducedKind::fourth_reduced: return rhs_fourth_reduced(j, p.C1, p.Cb);
    case ReducedKind::t3rd: return rhs_t3rd(j, p, trace, A);
    case ReducedKind::t4th: return rhs_t4th(j, p, trace, A);
    case ReducedKind::schrodinger_reduced: return rhs_schrodinger_reduced(j, p, trace, A);
  }
  throw ConfigError("unknown reduced kind");
}

/// Derivative order the RHS of a kind needs.
inline int jet_order(const ReducedParams& p) {
  switch (p.kind) {
    case ReducedKind::nls:
    case ReducedKind::schrodinger_reduced: return 2;
    case ReducedKind::hirota:
    case ReducedKind::t3rd: return p.a != 0.0 ? 3 : 2;
    case ReducedKind::fourth_reduced: return p.C1 != 0.0 ? 4 : 2;
    case ReducedKind::t4th: return p.a != 0.0 ? 4 : 2;
  }
  return 2;
}

inline ComplexField rhs_reduced(const ComplexField& q, const ReducedParams& p, const GridCalculus& calc,
                                const CurvatureTrace* trace = nullptr, double A = 0.0) {
  return rhs_reduced(make_jet(q, calc, jet_order(p)), p, trace, A);
}

struct ReducedTrajectory {
  std::vector<double> times;
  std::vector<ComplexField> states;
  std::vector<double> mass;
  double dt = 0.0;
  std::size_t steps = 0;
};

inline double mass(const ComplexField& q, const GridCalculus& calc) {
  std::vector<double> m(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) m[i] = std::norm(q[i]);
  return calc.integral(m);
}

/// Spectral-radius estimate of a reduced RHS (same policy as the geometric flows).
inline double spectral_radius_estimate(const GridSpec& grid, const ReducedParams& p, double max_amp2) {
  const double k = std::numbers::pi / grid.dx();
  const double G = max_amp2;
  const double a = (p.kind == ReducedKind::fourth_reduced) ? p.C1 : p.a;
  const double bc = (p.kind == ReducedKind::fourth_reduced) ? std::abs(2.0 * p.Cb) + 2.0 * std::abs(p.C1)
                                                            : std::abs(p.b) + std::abs(p.c) + std::abs(a);
  switch (p.spatial_order()) {
    case 4: return std::abs(a) * k * k * k * k + (1.0 + 3.0 * bc * G) * k * k + G;
    case 3: return std::abs(a) * k * k * k + k * k + 3.0 * (std::abs(a) + std::abs(p.b)) * G * k + G;
    default: return k * k + G;
  }
}

/// RK4 evolution of a constant-curvature reduced equation.
inline ReducedTrajectory evolve_reduced(const ComplexField& q0, const ReducedParams& p, const EvolutionConfig& cfg) {
  p.validate();
  if (p.kappa_mode != KappaMode::constant || p.nonlocal)
    throw ConfigError("evolve_reduced supports constant curvature only; nonlocal terms need a live map (residual mode)");
  const GridCalculus calc(q0.grid);
  double G = 0.0;
  for (const auto& v : q0.values) G = std::max(G, std::norm(v));
  const double bound = cfg.cfl_safety * std::pow(q0.grid.dx(), p.spatial_order());
  double dt = cfg.dt;
  if (dt <= 0.0) {
    dt = std::min(bound, cfg.stability_factor / spectral_radius_estimate(q0.grid, p, G));
  } else if (dt > bound * (1.0 + 1e-12)) {
    throw ConfigError("evolution.dt violates dt <= safety*dx^p = " + std::to_string(bound));
  }
  ReducedTrajectory traj;
  const int order = jet_order(p);
  detail::integrate_rk4<cplx>(
      q0.values, cfg.t_final, dt, cfg.snapshot_stride, cfg.blowup_threshold,
      [&](const std::vector<cplx>& y) {
        return rhs_reduced(make_jet(ComplexField{q0.grid, y}, calc, order), p).values;
      },
      [](std::vector<cplx>&) {}, [](const std::vector<cplx>&, std::vector<cplx>&) {}, [](std::vector<cplx>&) {},
      [&](double t, const std::vector<cplx>& y) {
        ComplexField s{q0.grid, y};
        traj.mass.push_back(mass(s, calc));
        traj.times.push_back(t);
        traj.states.push_back(std::move(s));
      },
      &traj.steps, &traj.dt);
  return traj;
}

}  // namespace hasimoto
