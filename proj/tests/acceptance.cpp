// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "hasimoto/hasimoto.hpp"

using namespace hasimoto;
constexpr double pi = std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

GridSpec circle_grid(int n) { return GridSpec::periodic(n, 0.0, 2 * pi); }

bool in_band(double ratio) { return ratio >= 8.0 && ratio <= 32.0; }

std::string ratios_text(const std::vector<double>& e) {
  std::string s;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) s += fmt("%s%.3g", k ? ", " : "", e[k] / e[k + 1]);
  return s;
}

bool ratios_ok(const std::vector<double>& e) {
  for (std::size_t k = 0; k + 1 < e.size(); ++k)
    if (!in_band(e[k] / e[k + 1])) return false;
  return e.size() >= 3;
}

// Size of the largest individual term a cubic dispersive RHS can produce from this jet.
double jet_scale(const ComplexJet& j) {
  double amp = 0.0, deriv = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) amp = std::max(amp, std::abs(j[0][i]));
  for (int k = 0; k <= j.order; ++k)
    for (std::size_t i = 0; i < j.size(); ++i) deriv = std::max(deriv, std::abs(j[k][i]));
  return deriv * std::max(1.0, amp * amp);
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<ComplexJet> random_jets(int order) {
  std::vector<ComplexJet> out;
  const auto g = circle_grid(64);
  const GridCalculus calc(g);
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    out.push_back(make_jet(presets::random_bandlimited_complex(g, seed, 4, 1.0), calc, order));
  return out;
}

Outcome identity_a() {
  double worst = 0.0;
  for (const auto& j : random_jets(3))
    for (double a : {1.0, -1.0, 0.3})
      worst = std::max(worst, max_diff(rhs_t3rd(j, ReducedParams::t3rd(a, 0.5 * a)), rhs_hirota(j, a)) / jet_scale(j));
  return {worst <= 1e-12, fmt("max |t3rd - hirota| / scale = %.3g over 20 fields x 3 values of a", worst)};
}

Outcome identity_b() {
  double worst = 0.0;
  for (const auto& j : random_jets(4))
    for (auto [C1, Cb] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{0.05, 0.1}}) {
      const auto f = coefficient_map_f(C1, Cb);
      const double d = max_diff(rhs_t4th(j, ReducedParams::t4th(f.a, f.b, f.c)), rhs_fourth_reduced(j, C1, Cb));
      worst = std::max(worst, d / jet_scale(j));
    }
  return {worst <= 1e-12, fmt("max |t4th - fourth_reduced| / scale = %.3g over 20 fields x 3 (C1,Cb)", worst)};
}

Outcome geodesics() {
  const auto g = circle_grid(256);
  const auto z0 = presets::great_circle_chart(g);
  EvolutionConfig cfg;
  cfg.t_final = 0.1;
  cfg.snapshot_stride = 1 << 30;
  const auto p3 = FlowParams::third_order(1.0, 0.5);
  const auto z3 = evolve(z0, p3, cfg).states.back();
  const auto shifted = presets::great_circle_chart(GridSpec::periodic(256, p3.b * 0.1, 2 * pi + p3.b * 0.1));
  double e3 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) e3 = std::max(e3, std::abs(z3.points[i] - shifted.points[i]));
  // dt <= 0.2 dx^4 makes N=256 cost ~1.4M steps; stationarity does not depend on N
  const auto w0 = presets::great_circle_chart(circle_grid(64));
  const auto z4 = evolve(w0, coefficient_map_f(0.05, 0.1), cfg).states.back();
  double e4 = 0.0;
  for (std::size_t i = 0; i < w0.size(); ++i) e4 = std::max(e4, std::abs(z4.points[i] - w0.points[i]));
  return {e3 <= 1e-6 && e4 <= 1e-6,
          fmt("third_order(1,0.5) vs u0(x+bt) at N=256: %.3g; fourth_order stationary at N=64: %.3g (t=0.1)", e3, e4)};
}

// Scenario slices shared by the transform-identity and residual criteria.
struct SliceStats {
  double orth = 0.0, gap = 0.0;
  std::vector<double> parallelism;  // per resolution
};

template <class S>
void slice_metrics(const Trajectory<MapField<S>>& tr, SliceStats& st) {
  const GridCalculus calc(tr.states.front().grid);
  const auto e0 = default_anchor(tr.states.front());
  double par = 0.0;
  for (const auto& u : tr.states) {
    const auto f = anchored_frame(u, e0, calc);
    st.orth = std::max(st.orth, frame_orthonormality(u, f));
    par = std::max(par, parallelism_residual(u, f, calc));
    const auto q = hasimoto_q(u, f, calc);
    const auto ux = map_derivative(u, calc);
    const auto g = pointwise_inner(u, ux, ux);
    for (std::size_t i = 0; i < g.size(); ++i) st.gap = std::max(st.gap, std::abs(std::norm(q[i]) - g[i]));
  }
  st.parallelism.push_back(par);
}

Outcome transform_identities() {
  std::vector<std::pair<std::string, SliceStats>> all;
  {
    SliceStats st;
    for (int n : {128, 256}) {
      EvolutionConfig cfg;
      cfg.t_final = 0.1;
      cfg.snapshot_stride = 1 << 30;
      auto tr = evolve(presets::bump(circle_grid(n)), FlowParams::schrodinger_map(), cfg);
      cfg.snapshot_stride = std::max<int>(1, static_cast<int>(tr.steps / 10));
      slice_metrics(evolve(presets::bump(circle_grid(n)), FlowParams::schrodinger_map(), cfg), st);
    }
    all.emplace_back("schrodinger_map bump", st);
  }
  {
    SliceStats st;
    for (int n : {128, 256})
      slice_metrics(sample_slices(presets::bump(circle_grid(n)), FlowParams::third_order(1.0, 0.5), 0.01, 1e-4 * 128 / n, {}), st);
    all.emplace_back("third_order bump", st);
  }
  const auto p4 = coefficient_map_f(0.05, 0.1);
  {
    SliceStats st;
    for (int n : {96, 192}) slice_metrics(sample_slices(presets::bump(circle_grid(n)), p4, 0.001, 5e-5 * 96 / n, {}), st);
    all.emplace_back("fourth_order bump", st);
  }
  {
    SliceStats st;
    for (int n : {96, 192}) {
      const auto z0 = presets::bump_chart(circle_grid(n), {}, ConformalChart(perturbed_round_metric(0.2), -1));
      slice_metrics(sample_slices(z0, p4, 0.001, 5e-5 * 96 / n, {}), st);
    }
    all.emplace_back("fourth_order perturbed chart", st);
  }
  bool ok = true;
  double orth = 0.0, gap = 0.0, min_order = std::numeric_limits<double>::infinity();
  for (const auto& [name, st] : all) {
    orth = std::max(orth, st.orth);
    gap = std::max(gap, st.gap);
    const double a = st.parallelism[0], b = st.parallelism[1];
    const double order = b <= 1e-12 ? std::numeric_limits<double>::infinity() : std::log2(a / b);
    min_order = std::min(min_order, order);
    if (!(order >= 3.5)) ok = false;
  }
  ok = ok && orth <= 1e-10 && gap <= 1e-10;
  return {ok, fmt("orthonormality %.3g, ||q|^2 - g(u_x,u_x)| %.3g, lowest parallelism order %.3g (4 scenarios, 2 resolutions)",
                  orth, gap, min_order)};
}

Outcome residual_third() {
  std::vector<MapField<UnitSphere>> levels;
  for (int n : {128, 256, 512}) levels.push_back(presets::bump(circle_grid(n)));
  const auto r = residual_study(levels, FlowParams::third_order(1.0, 0.5), 0.01, 1e-4, {});
  return {ratios_ok(r.level_l2) && r.all_finite(),
          fmt("L2 residual %.3g, %.3g, %.3g; ratios %s (N=128..512)", r.level_l2[0], r.level_l2[1], r.level_l2[2],
              ratios_text(r.level_l2).c_str())};
}

Outcome residual_fourth() {
  const auto p = coefficient_map_f(0.05, 0.1);
  std::vector<MapField<UnitSphere>> sphere;
  std::vector<MapField<ConformalChart>> chart;
  for (int n : {96, 192, 384}) {
    sphere.push_back(presets::bump(circle_grid(n)));
    chart.push_back(presets::bump_chart(circle_grid(n), {}, ConformalChart(perturbed_round_metric(0.2), -1)));
  }
  const auto rs = residual_study(sphere, p, 0.001, 5e-5, {});
  const auto rc = residual_study(chart, p, 0.001, 5e-5, {});
  return {ratios_ok(rs.level_l2) && ratios_ok(rc.level_l2) && rs.all_finite() && rc.all_finite(),
          fmt("sphere ratios %s; perturbed chart (nonlocal brackets) ratios %s", ratios_text(rs.level_l2).c_str(),
              ratios_text(rc.level_l2).c_str())};
}

Outcome commutation() {
  const auto u = presets::bump(circle_grid(128));
  const auto p = FlowParams::schrodinger_map();
  EvolutionConfig cfg;
  cfg.t_final = 0.1;
  cfg.snapshot_stride = 1 << 30;
  ConvergenceSpec spec;
  spec.floor = 1e-13;
  const auto r = commutation_error(std::vector{u, u, u}, p, cfl_bound(u.grid, p, cfg.cfl_safety), cfg, spec);
  return {ratios_ok(r.level_l2) && r.flags.at("q_periodic"),
          fmt("||q_A - q_B|| at t=0.1: %.3g, %.3g, %.3g; ratios %s (dt halved, N=128)", r.level_l2[0], r.level_l2[1],
              r.level_l2[2], ratios_text(r.level_l2).c_str())};
}

Outcome conservation() {
  const auto u = presets::bump(circle_grid(128));
  EvolutionConfig cfg;
  cfg.t_final = 0.1;
  cfg.snapshot_stride = 20;
  const double sm = invariant_report(evolve(u, FlowParams::schrodinger_map(), cfg)).metrics.at("energy_drift");
  const double t3 = invariant_report(evolve(u, FlowParams::third_order(1.0, 0.5), cfg)).metrics.at("energy_drift");
  const auto q0 = presets::random_bandlimited_complex(circle_grid(64), 7, 4, 1.0);
  double mass_drift = 0.0;
  for (const auto& rp : {ReducedParams::nls(), ReducedParams::hirota(1.0)}) {
    EvolutionConfig c;
    c.t_final = 0.1;
    const auto tr = evolve_reduced(q0, rp, c);
    for (double m : tr.mass) mass_drift = std::max(mass_drift, std::abs(m - tr.mass.front()) / tr.mass.front());
  }
  return {sm <= 1e-6 && t3 <= 1e-6 && mass_drift <= 1e-8,
          fmt("energy drift SM %.3g, third_order %.3g; NLS/Hirota mass drift %.3g", sm, t3, mass_drift)};
}

Outcome dispersion() {
  const auto g = GridSpec::periodic(16, 0.0, 8 * pi);
  std::vector<double> h, e2, ei;
  double omega = 0.0;
  for (double dt : {0.2, 0.1, 0.05}) {
    EvolutionConfig cfg;
    cfg.t_final = 1.0;
    cfg.dt = dt;
    const auto q = evolve_reduced(presets::plane_wave(g, 1.0, 1.0), ReducedParams::nls(), cfg).states.back();
    std::vector<cplx> d;
    cplx overlap{};
    for (int i = 0; i < g.n_points; ++i) {
      const auto exact = std::polar(1.0, g.x(i) - 0.5);
      d.push_back(q[static_cast<std::size_t>(i)] - exact);
      overlap += q[static_cast<std::size_t>(i)] * std::polar(1.0, -g.x(i));
    }
    omega = -std::arg(overlap);
    h.push_back(dt);
    e2.push_back(l2_norm(d, g.dx()));
    ei.push_back(linf_norm(d));
  }
  const auto r = convergence_study("nls_plane_wave", "time", h, e2, ei);
  EvolutionConfig cfg;
  cfg.t_final = 0.1;
  const auto psi0 = presets::plane_wave(g, 1.0, 1.0);
  const auto tr = evolve_reduced(psi0, ReducedParams::hirota(1.0), cfg);
  const double hirota = max_diff(tr.states.back(), psi0);
  return {ratios_ok(e2) && r.passed() && hirota <= 1e-6,
          fmt("NLS omega %.12f, phase error ratios %s; Hirota standing wave drift %.3g", omega, ratios_text(e2).c_str(),
              hirota)};
}

Outcome hypothesis_violation() {
  const auto u0 = presets::great_circle(circle_grid(64));
  const auto flow = FlowParams::schrodinger_map();
  const auto tr = sample_slices(u0, flow, 0.004, 1e-3, {});
  const auto r = residual_t3rd(tr, flow);
  const double naive = r.series.at("naive_linf")[0], A5 = r.series.at("A_eff")[0], corrected = r.l2[0];
  const GridCalculus calc(u0.grid);
  const auto e0 = default_anchor(u0);
  const auto& s0 = tr.states[1];
  const auto& s1 = tr.states[2];
  const double A = estimate_A(s0, anchored_frame(s0, e0, calc), s1, anchored_frame(s1, e0, calc), 1e-3, flow, calc);
  const bool ok = std::abs(naive - 0.5) <= 0.025 && std::abs(A - 0.5) <= 0.025 && std::abs(A5 - 0.5) <= 0.025 &&
                  corrected <= 1e-8 && r.flags.at("gauge_uncertain");
  return {ok, fmt("naive residual %.6g, estimate_A %.6g (five-point %.6g), corrected residual %.3g, gauge_uncertain=%s",
                  naive, A, A5, corrected, r.flags.at("gauge_uncertain") ? "yes" : "no")};
}

Outcome helix_agreement() {
  const auto g = GridSpec::periodic(128, 0.0, 2 * pi * std::sqrt(2.0));
  const GridCalculus calc(g);
  const auto X = presets::helix(g);
  const auto u = tangent_map(X, calc);
  const auto q = hasimoto_q(u, anchored_frame(u, default_anchor(u), calc), calc);
  const auto psi = classical_hasimoto(X, calc);
  const auto fd = frenet_frame(X, calc);
  double mod = 0.0, phase = 0.0, aligned = 0.0;
  cplx overlap{};
  for (std::size_t i = 0; i < q.size(); ++i) {
    mod = std::max(mod, std::abs(std::abs(q[i]) - std::abs(psi[i])));
    overlap += std::conj(psi[i]) * q[i];
  }
  for (std::size_t i = 0; i + 1 < q.size(); ++i)
    phase = std::max(phase, std::abs(std::arg(q[i + 1] / q[i]) / g.dx() - 0.5 * (fd.tau[i] + fd.tau[i + 1])));
  const cplx rot = std::polar(1.0, -std::arg(overlap));
  for (std::size_t i = 0; i < q.size(); ++i) aligned = std::max(aligned, std::abs(q[i] * rot - psi[i]));
  return {mod <= 1e-10 && phase <= 1e-9 && aligned <= 1e-9,
          fmt("||psi|-|q|| %.3g, |d arg q - tau| %.3g, |q e^{-i phi} - psi| %.3g (N=128)", mod, phase, aligned)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"coefficient identity A", identity_a},
      {"coefficient identity B", identity_b},
      {"geodesic exact solutions", geodesics},
      {"transform identities", transform_identities},
      {"third-order residual refinement", residual_third},
      {"fourth-order residual refinement", residual_fourth},
      {"commutation refinement", commutation},
      {"conservation", conservation},
      {"dispersion relations", dispersion},
      {"hypothesis violation", hypothesis_violation},
      {"helix transform agreement", helix_agreement},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s [%zu] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
