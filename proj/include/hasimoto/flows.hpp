#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hasimoto/calculus.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/map_field.hpp"
#include "hasimoto/surface.hpp"
#include "hasimoto/vec3.hpp"

namespace hasimoto {

enum class FlowKind { schrodinger_map, third_order, fourth_order, filament_third, filament_fourth };

inline std::string to_string(FlowKind k) {
  switch (k) {
    case FlowKind::schrodinger_map: return "schrodinger_map";
    case FlowKind::third_order: return "third_order";
    case FlowKind::fourth_order: return "fourth_order";
    case FlowKind::filament_third: return "filament_third";
    case FlowKind::filament_fourth: return "filament_fourth";
  }
  return "unknown";
}

inline FlowKind flow_kind_from_string(const std::string& s) {
  for (auto k : {FlowKind::schrodinger_map, FlowKind::third_order, FlowKind::fourth_order, FlowKind::filament_third,
                 FlowKind::filament_fourth})
    if (to_string(k) == s) return k;
  throw ConfigError("flow.kind: unknown flow kind '" + s + "'");
}

/// Coefficients of
///   u_t = a nabla^2 u_x + J nabla u_x + b g(u_x,u_x) u_x                      (third order)
///   u_t = -a J nabla^3 u_x + {1 + b g(u_x,u_x)} J nabla u_x + c g(nabla u_x,u_x) J u_x   (fourth order)
/// and of the filament equations (a for the third-order filament, C1/Cb for the fourth).
struct FlowParams {
  FlowKind kind = FlowKind::schrodinger_map;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double C1 = 0.0;
  double Cb = 0.0;

  static FlowParams schrodinger_map() { return {}; }
  static FlowParams third_order(double a, double b) { return {FlowKind::third_order, a, b, 0.0, 0.0, 0.0}; }
  static FlowParams fourth_order(double a, double b, double c) {
    return {FlowKind::fourth_order, a, b, c, 0.0, 0.0};
  }
  static FlowParams filament_third(double a) { return {FlowKind::filament_third, a, 0.0, 0.0, 0.0, 0.0}; }
  static FlowParams filament_fourth(double C1, double Cb) {
    return {FlowKind::filament_fourth, 0.0, 0.0, 0.0, C1, Cb};
  }

  bool is_map_flow() const {
    return kind == FlowKind::schrodinger_map || kind == FlowKind::third_order || kind == FlowKind::fourth_order;
  }

  bool is_third_order_family() const {
    return kind == FlowKind::schrodinger_map || kind == FlowKind::third_order;
  }

  void validate() const {
    if (kind == FlowKind::schrodinger_map && (a != 0.0 || b != 0.0 || c != 0.0))
      throw ConfigError("schrodinger_map requires a = b = c = 0");
    for (double v : {a, b, c, C1, Cb})
      if (!std::isfinite(v)) throw ConfigError("flow coefficients must be finite");
  }

  /// Highest spatial derivative order carried by the flow.
  int spatial_order() const {
    switch (kind) {
      case FlowKind::schrodinger_map: return 2;
      case FlowKind::third_order: return a != 0.0 ? 3 : 2;
      case FlowKind::fourth_order: return a != 0.0 ? 4 : 2;
      case FlowKind::filament_third: return a != 0.0 ? 3 : 2;
      case FlowKind::filament_fourth: return C1 != 0.0 ? 4 : 2;
    }
    return 2;
  }
};

/// Filament model with axial flow (constant a) written as a third-order flow: b = a/2.
inline FlowParams coefficient_map_fm(double a) {
  auto p = FlowParams::third_order(a, a / 2.0);
  return p;
}

/// Elliptic-core filament model (C1, Cb) written as a fourth-order flow:
/// a = C1, b = Cb - C1, c = 2 Cb + C1.
inline FlowParams coefficient_map_f(double C1, double Cb) {
  auto p = FlowParams::fourth_order(C1, Cb - C1, 2.0 * Cb + C1);
  p.C1 = C1;
  p.Cb = Cb;
  return p;
}

// ---------------------------------------------------------------------------
// Map flows
// ---------------------------------------------------------------------------

template <class S>
TangentField<S> rhs_third_order(const MapField<S>& u, const FlowParams& p, const GridCalculus& calc) {
  if (!p.is_third_order_family()) throw ConfigError("rhs_third_order: flow kind must be schrodinger_map or third_order");
  const auto t = covariant_tower(u, calc, p.a != 0.0 ? 2 : 1);
  TangentField<S> out{std::vector<typename S::Tangent>(u.size())};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& z = u.points[i];
    auto v = u.surface.J(z, t.d1[i]) + (p.b * u.surface.inner(z, t.ux[i], t.ux[i])) * t.ux[i];
    if (p.a != 0.0) v += p.a * t.d2[i];
    out[i] = v;
  }
  return out;
}

template <class S>
TangentField<S> rhs_fourth_order(const MapField<S>& u, const FlowParams& p, const GridCalculus& calc) {
  if (p.kind != FlowKind::fourth_order) throw ConfigError("rhs_fourth_order: flow kind must be fourth_order");
  const auto t = covariant_tower(u, calc, p.a != 0.0 ? 3 : 1);
  TangentField<S> out{std::vector<typename S::Tangent>(u.size())};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& z = u.points[i];
    const double e = u.surface.inner(z, t.ux[i], t.ux[i]);
    const double m = u.surface.inner(z, t.d1[i], t.ux[i]);
    auto v = (1.0 + p.b * e) * u.surface.J(z, t.d1[i]) + (p.c * m) * u.surface.J(z, t.ux[i]);
    if (p.a != 0.0) v -= p.a * u.surface.J(z, t.d3[i]);
    out[i] = v;
  }
  return out;
}

template <class S>
TangentField<S> rhs_map_flow(const MapField<S>& u, const FlowParams& p, const GridCalculus& calc) {
  if (p.kind == FlowKind::fourth_order) return rhs_fourth_order(u, p, calc);
  return rhs_third_order(u, p, calc);
}

/// Velocity-vector form of the axial-flow filament model on the sphere:
///   u_t = u x u_xx + a {u_xxx + 3 (u_xx, u_x) u + (3/2) |u_x|^2 u_x}.
inline TangentField<UnitSphere> rhs_third_order_extrinsic(const MapField<UnitSphere>& u, double a,
                                                          const GridCalculus& calc) {
  const auto d = calc.derivatives(u.points, 3);
  TangentField<UnitSphere> out{std::vector<Vec3>(u.size())};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3& p = u.points[i];
    out[i] = cross(p, d[1][i]) +
             a * (d[2][i] + 3.0 * dot(d[1][i], d[0][i]) * p + 1.5 * dot(d[0][i], d[0][i]) * d[0][i]);
  }
  return out;
}

/// Velocity-vector form of the elliptic-core filament model on the sphere:
///   u_t = u x u_xx - C1 u x u_xxxx + (Cb - 2 C1) (|u_x|^2 u x u_x)_x,
/// with the last term differentiated as a product on the grid.
inline TangentField<UnitSphere> rhs_fourth_order_extrinsic(const MapField<UnitSphere>& u, double C1, double Cb,
                                                           const GridCalculus& calc) {
  const auto d = calc.derivatives(u.points, 4);
  std::vector<Vec3> flux(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) flux[i] = dot(d[0][i], d[0][i]) * cross(u.points[i], d[0][i]);
  const auto flux_x = calc.derivative(flux, 1);
  TangentField<UnitSphere> out{std::vector<Vec3>(u.size())};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3& p = u.points[i];
    out[i] = cross(p, d[1][i]) - C1 * cross(p, d[3][i]) + (Cb - 2.0 * C1) * flux_x[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filaments
// ---------------------------------------------------------------------------

/// Arc-length parametrised filament X(x). On periodic grids the curve may be
/// quasi-periodic: X(x + L) = X(x) + period_offset (e.g. a helix).
struct FilamentState {
  GridSpec grid;
  std::vector<Vec3> X;
  Vec3 period_offset{};

  std::size_t size() const { return X.size(); }
};

/// X_x, X_xx, ... up to max_order.
inline std::vector<std::vector<Vec3>> filament_derivatives(const FilamentState& f, const GridCalculus& calc,
                                                           int max_order) {
  if (!calc.periodic()) return calc.derivatives(f.X, max_order);
  const double L = f.grid.length();
  std::vector<Vec3> periodic_part(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    periodic_part[i] = f.X[i] - f.period_offset * ((f.grid.x(static_cast<int>(i)) - f.grid.x_min) / L);
  auto d = calc.derivatives(periodic_part, max_order);
  for (auto& v : d[0]) v += f.period_offset / L;
  return d;
}

/// Tangent T = X_x.
inline std::vector<Vec3> filament_tangent(const FilamentState& f, const GridCalculus& calc) {
  return filament_derivatives(f, calc, 1)[0];
}

/// X_t = X_x x X_xx + a [X_xxx + (3/2) |X_xx|^2 X_x].
inline std::vector<Vec3> rhs_filament_third(const FilamentState& f, double a, const GridCalculus& calc) {
  const auto d = filament_derivatives(f, calc, 3);
  std::vector<Vec3> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = cross(d[0][i], d[1][i]) + a * (d[2][i] + 1.5 * dot(d[1][i], d[1][i]) * d[0][i]);
  return out;
}

/// X_t = X_x x X_xx - C1 X_x x X_xxxx + C1 X_xx x X_xxx + (Cb - 2 C1) |X_xx|^2 X_x x X_xx.
inline std::vector<Vec3> rhs_filament_fourth(const FilamentState& f, double C1, double Cb, const GridCalculus& calc) {
  const auto d = filament_derivatives(f, calc, 4);
  std::vector<Vec3> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 b = cross(d[0][i], d[1][i]);
    out[i] = b - C1 * cross(d[0][i], d[3][i]) + C1 * cross(d[1][i], d[2][i]) +
             (Cb - 2.0 * C1) * dot(d[1][i], d[1][i]) * b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conserved quantities and diagnostics
// ---------------------------------------------------------------------------

struct ConservedQuantities {
  double energy = 0.0;              ///< integral of g(u_x, u_x) dx
  double membership_defect = 0.0;   ///< max | |u| - 1 | (sphere) or 0
  double arc_length_defect = 0.0;   ///< max | |X_x| - 1 | (filaments) or 0
};

template <class S>
ConservedQuantities conserved_quantities(const MapField<S>& u, const GridCalculus& calc) {
  const auto ux = map_derivative(u, calc);
  ConservedQuantities q;
  q.energy = calc.integral(pointwise_inner(u, ux, ux));
  q.membership_defect = u.membership_defect();
  return q;
}

inline ConservedQuantities conserved_quantities(const FilamentState& f, const GridCalculus& calc) {
  const auto d = filament_derivatives(f, calc, 2);
  ConservedQuantities q;
  std::vector<double> curv2(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    curv2[i] = dot(d[1][i], d[1][i]);
    q.arc_length_defect = std::max(q.arc_length_defect, std::abs(norm(d[0][i]) - 1.0));
  }
  q.energy = calc.integral(curv2);
  return q;
}

// ---------------------------------------------------------------------------
// Time integration
// ---------------------------------------------------------------------------

enum class Projection { per_step, per_stage, off };

inline std::string to_string(Projection p) {
  switch (p) {
    case Projection::per_step: return "per_step";
    case Projection::per_stage: return "per_stage";
    case Projection::off: return "off";
  }
  return "unknown";
}

inline Projection projection_from_string(const std::string& s) {
  if (s == "per_step") return Projection::per_step;
  if (s == "per_stage") return Projection::per_stage;
  if (s == "off") return Projection::off;
  throw ConfigError("evolution.projection: unknown projection '" + s + "'");
}

struct EvolutionConfig {
  double dt = 0.0;  ///< <= 0 selects the automatic step
  double t_final = 0.1;
  Projection projection = Projection::per_step;
  int snapshot_stride = 1;
  double cfl_safety = 0.2;       ///< dt <= cfl_safety * dx^p
  double stability_factor = 2.0; ///< dt <= stability_factor / (spectral radius estimate)
  double blowup_threshold = 1e8;
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<ConservedQuantities> diagnostics;
  double dt = 0.0;
  std::size_t steps = 0;
};

/// Upper bound dt <= safety * dx^p from the explicit-scheme heuristic.
inline double cfl_bound(const GridSpec& grid, const FlowParams& p, double safety) {
  return safety * std::pow(grid.dx(), p.spatial_order());
}

/// Spectral-radius estimate of the linearised right-hand side on the grid.
inline double spectral_radius_estimate(const GridSpec& grid, const FlowParams& p, double max_speed2) {
  const double k = std::numbers::pi / grid.dx();
  const double G = max_speed2;
  switch (p.kind) {
    case FlowKind::schrodinger_map:
    case FlowKind::third_order:
      return std::abs(p.a) * k * k * k + k * k + std::abs(p.b) * G * k;
    case FlowKind::fourth_order:
      return std::abs(p.a) * k * k * k * k + std::abs(p.a) * std::sqrt(G) * k * k * k +
             (1.0 + (std::abs(p.b) + std::abs(p.c) + 6.0 * std::abs(p.a)) * G) * k * k;
    case FlowKind::filament_third:
      return std::abs(p.a) * k * k * k + k * k + 1.5 * std::abs(p.a) * G * k;
    case FlowKind::filament_fourth:
      return std::abs(p.C1) * k * k * k * k + 2.0 * std::abs(p.C1) * std::sqrt(G) * k * k * k +
             (1.0 + std::abs(p.Cb - 2.0 * p.C1) * G) * k * k;
  }
  return k * k;
}

namespace detail {

template <class T>
double max_abs(const std::vector<T>& v) {
  double m = 0.0;
  for (const auto& x : v) {
    double a;
    if constexpr (std::is_same_v<T, Vec3>) {
      a = norm(x);
    } else {
      a = std::abs(x);
    }
    if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
    m = std::max(m, a);
  }
  return m;
}

template <class T>
std::vector<T> axpy(const std::vector<T>& y, double s, const std::vector<T>& k) {
  std::vector<T> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + s * k[i];
  return out;
}

/// Step count and exact step size landing on t_final.
inline std::pair<std::size_t, double> step_plan(double t_final, double dt) {
  if (!(t_final > 0.0)) throw ConfigError("evolution.t_final must be positive");
  if (!(dt > 0.0)) throw ConfigError("evolution.dt must be positive");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t_final / dt - 1e-9)));
  return {n, t_final / static_cast<double>(n)};
}

/// Classical RK4 with optional projection hooks.
///   stage_fix(state)       applied to every stage input (per_stage projection)
///   slope_fix(state, k)    applied to every stage slope
///   step_fix(state)        applied after the full step (per_step projection)
template <class T, class Rhs, class StageFix, class SlopeFix, class StepFix, class Record>
void integrate_rk4(std::vector<T> y, double t_final, double dt_request, int stride, double blowup, Rhs&& rhs,
                   StageFix&& stage_fix, SlopeFix&& slope_fix, StepFix&& step_fix, Record&& record,
                   std::size_t* steps_out, double* dt_out) {
  if (stride < 1) throw ConfigError("evolution.snapshot_stride must be >= 1");
  const auto [n_steps, dt] = step_plan(t_final, dt_request);
  if (steps_out) *steps_out = n_steps;
  if (dt_out) *dt_out = dt;
  record(0.0, y);
  double t = 0.0;
  for (std::size_t s = 1; s <= n_steps; ++s) {
    auto eval = [&](std::vector<T> state) {
      stage_fix(state);
      auto k = rhs(state);
      slope_fix(state, k);
      return k;
    };
    const auto k1 = eval(y);
    const auto k2 = eval(axpy(y, 0.5 * dt, k1));
    const auto k3 = eval(axpy(y, 0.5 * dt, k2));
    const auto k4 = eval(axpy(y, dt, k3));
    std::vector<T> next(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) next[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    step_fix(next);
    const double m = max_abs(next);
    if (!(m < blowup))
      throw BlowUpError("non-finite or exploding state at t = " + std::to_string(t + dt), t);
    y = std::move(next);
    t = static_cast<double>(s) * dt;
    if (s % static_cast<std::size_t>(stride) == 0 || s == n_steps) record(t, y);
  }
}

}  // namespace detail

/// Largest g(u_x, u_x) over the grid.
template <class S>
double max_speed2(const MapField<S>& u, const GridCalculus& calc) {
  const auto ux = map_derivative(u, calc);
  double m = 0.0;
  for (double e : pointwise_inner(u, ux, ux)) m = std::max(m, e);
  return m;
}

inline double max_speed2(const FilamentState& f, const GridCalculus& calc) {
  const auto d = filament_derivatives(f, calc, 2);
  double m = 0.0;
  for (const auto& v : d[1]) m = std::max(m, dot(v, v));
  return m;
}

/// Automatic step: the smaller of the CFL heuristic and the RK4 stability estimate.
template <class State>
double recommended_dt(const State& u0, const FlowParams& p, const EvolutionConfig& cfg, const GridCalculus& calc) {
  const double G = max_speed2(u0, calc);
  const double rho = spectral_radius_estimate(u0.grid, p, G);
  return std::min(cfl_bound(u0.grid, p, cfg.cfl_safety), cfg.stability_factor / rho);
}

inline double resolve_dt(double requested, double recommended, const GridSpec& grid, const FlowParams& p,
                         double safety) {
  if (requested <= 0.0) return recommended;
  const double bound = cfl_bound(grid, p, safety);
  if (requested > bound * (1.0 + 1e-12))
    throw ConfigError("evolution.dt = " + std::to_string(requested) + " violates dt <= safety*dx^p = " +
                      std::to_string(bound));
  return requested;
}

/// Method-of-lines RK4 evolution of a geometric map flow.
template <class S>
Trajectory<MapField<S>> evolve(const MapField<S>& u0, const FlowParams& p, const EvolutionConfig& cfg) {
  p.validate();
  if (!p.is_map_flow()) throw ConfigError("evolve: filament kinds require a FilamentState");
  const GridCalculus calc(u0.grid);
  const double dt = resolve_dt(cfg.dt, recommended_dt(u0, p, cfg, calc), u0.grid, p, cfg.cfl_safety);
  Trajectory<MapField<S>> traj;
  MapField<S> work = u0;
  constexpr bool sphere = std::is_same_v<S, UnitSphere>;
  const bool per_stage = sphere && cfg.projection == Projection::per_stage;
  const bool per_step = sphere && cfg.projection != Projection::off;
  using P = typename S::Point;
  detail::integrate_rk4<P>(
      u0.points, cfg.t_final, dt, cfg.snapshot_stride, cfg.blowup_threshold,
      [&](const std::vector<P>& y) {
        work.points = y;
        return rhs_map_flow(work, p, calc).values;
      },
      [&](std::vector<P>& y) {
        if (per_stage)
          for (auto& v : y) v = S::project(v);
      },
      [&](const std::vector<P>& y, std::vector<P>& k) {
        if (per_stage)
          for (std::size_t i = 0; i < y.size(); ++i) k[i] = S::project_tangent(y[i], k[i]);
      },
      [&](std::vector<P>& y) {
        if (per_step)
          for (auto& v : y) v = S::project(v);
      },
      [&](double t, const std::vector<P>& y) {
        MapField<S> snap = u0;
        snap.points = y;
        traj.diagnostics.push_back(conserved_quantities(snap, calc));
        traj.times.push_back(t);
        traj.states.push_back(std::move(snap));
      },
      &traj.steps, &traj.dt);
  return traj;
}

/// RK4 evolution of a filament under the curvature-free cross-product forms.
inline Trajectory<FilamentState> evolve(const FilamentState& X0, const FlowParams& p, const EvolutionConfig& cfg) {
  p.validate();
  if (p.kind != FlowKind::filament_third && p.kind != FlowKind::filament_fourth)
    throw ConfigError("evolve: filament state requires a filament flow kind");
  const GridCalculus calc(X0.grid);
  const double dt = resolve_dt(cfg.dt, recommended_dt(X0, p, cfg, calc), X0.grid, p, cfg.cfl_safety);
  Trajectory<FilamentState> traj;
  FilamentState work = X0;
  detail::integrate_rk4<Vec3>(
      X0.X, cfg.t_final, dt, cfg.snapshot_stride, cfg.blowup_threshold,
      [&](const std::vector<Vec3>& y) {
        work.X = y;
        return p.kind == FlowKind::filament_third ? rhs_filament_third(work, p.a, calc)
                                                  : rhs_filament_fourth(work, p.C1, p.Cb, calc);
      },
      [](std::vector<Vec3>&) {}, [](const std::vector<Vec3>&, std::vector<Vec3>&) {}, [](std::vector<Vec3>&) {},
      [&](double t, const std::vector<Vec3>& y) {
        FilamentState snap = X0;
        snap.X = y;
        traj.diagnostics.push_back(conserved_quantities(snap, calc));
        traj.times.push_back(t);
        traj.states.push_back(std::move(snap));
      },
      &traj.steps, &traj.dt);
  return traj;
}

}  // namespace hasimoto
