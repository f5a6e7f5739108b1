#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hasimoto/presets.hpp"
#include "hasimoto/reduced.hpp"

using namespace hasimoto;
constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

namespace {

GridSpec circle_grid(int n) { return GridSpec::periodic(n, 0.0, 2 * pi); }

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ComplexJet random_jet(int seed) {
  const auto g = circle_grid(64);
  return make_jet(presets::random_bandlimited_complex(g, static_cast<std::uint64_t>(seed), 4, 0.8), GridCalculus(g), 4);
}

}  // namespace

TEST(ReducedParams, KindNamesRoundTrip) {
  for (auto k : {ReducedKind::nls, ReducedKind::hirota, ReducedKind::fourth_reduced, ReducedKind::t3rd, ReducedKind::t4th,
                 ReducedKind::schrodinger_reduced})
    EXPECT_EQ(reduced_kind_from_string(to_string(k)), k);
  EXPECT_THROW(reduced_kind_from_string("kdv"), ConfigError);
}

TEST(ReducedParams, FromFlow) {
  EXPECT_EQ(ReducedParams::from_flow(FlowParams::schrodinger_map()).kind, ReducedKind::schrodinger_reduced);
  const auto p = ReducedParams::from_flow(FlowParams::fourth_order(0.1, 0.2, 0.3));
  EXPECT_EQ(p.kind, ReducedKind::t4th);
  EXPECT_DOUBLE_EQ(p.c, 0.3);
  EXPECT_THROW(ReducedParams::from_flow(FlowParams::filament_third(0.1)), ConfigError);
}

TEST(ReducedParams, NonlocalNeedsFieldCurvature) {
  auto p = ReducedParams::t3rd(0.5, 0.25);
  p.nonlocal = true;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(p.with_field().validate());
  EXPECT_THROW(rhs_t3rd(random_jet(1), ReducedParams::t3rd(0.5, 0.25).with_field()), ConfigError);
}

TEST(ReducedRhs, ThirdOrderAtUnitCurvatureIsHirota) {
  const auto j = random_jet(2);
  const double a = 0.7;
  EXPECT_LT(max_diff(rhs_t3rd(j, ReducedParams::t3rd(a, 0.5 * a)), rhs_hirota(j, a)), 1e-11);
}

TEST(ReducedRhs, FourthOrderAtUnitCurvatureIsEllipticCoreEquation) {
  const auto j = random_jet(3);
  const double C1 = 0.3, Cb = 0.8;
  const auto f = coefficient_map_f(C1, Cb);
  EXPECT_LT(max_diff(rhs_t4th(j, ReducedParams::t4th(f.a, f.b, f.c)), rhs_fourth_reduced(j, C1, Cb)), 1e-10);
}

TEST(ReducedRhs, LowOrderSpecialisationsAreNls) {
  const auto j = random_jet(4);
  const auto nls = rhs_nls(j);
  EXPECT_LT(max_diff(rhs_t3rd(j, ReducedParams::t3rd(0.0, 0.0)), nls), 1e-13);
  EXPECT_LT(max_diff(rhs_t4th(j, ReducedParams::t4th(0.0, 0.0, 0.0)), nls), 1e-13);
  EXPECT_LT(max_diff(rhs_schrodinger_reduced(j, ReducedParams::schrodinger_reduced()), nls), 1e-13);
  EXPECT_LT(max_diff(rhs_hirota(j, 0.0), nls), 1e-15);
  EXPECT_LT(max_diff(rhs_fourth_reduced(j, 0.0, 0.0), nls), 1e-15);
}

TEST(ReducedRhs, GaugeConstantAddsRotation) {
  const auto j = random_jet(5);
  for (const auto& p : {ReducedParams::t3rd(0.4, 0.1), ReducedParams::t4th(0.2, 0.3, 0.4),
                        ReducedParams::schrodinger_reduced()}) {
    const auto r0 = rhs_reduced(j, p);
    const auto r1 = rhs_reduced(j, p, nullptr, 0.75);
    for (std::size_t i = 0; i < j.size(); ++i) EXPECT_LT(std::abs(r1[i] - r0[i] + 0.75 * I * j[0][i]), 1e-13);
  }
}

TEST(ReducedRhs, FieldCurvatureWithConstantTraceMatchesConstantMode) {
  const auto j = random_jet(6);
  CurvatureTrace tr{std::vector<double>(j.size(), 1.0), std::vector<double>(j.size(), 0.0)};
  for (const auto& p : {ReducedParams::t3rd(0.4, 0.1), ReducedParams::t4th(0.2, 0.3, 0.4),
                        ReducedParams::schrodinger_reduced()})
    EXPECT_LT(max_diff(rhs_reduced(j, p.with_field(), &tr), rhs_reduced(j, p)), 1e-13) << to_string(p.kind);
}

TEST(ReducedRhs, NonlocalTermForLinearCurvature) {
  // kappa = 1 + x/10, q = 1: the schrodinger bracket is int_0^x |q|^2 kappa_x = x/10
  const auto g = GridSpec::line(41, 0.0, 4.0);
  ComplexField q{g, std::vector<cplx>(g.size(), 1.0)};
  CurvatureTrace tr;
  for (double x : g.coordinates()) {
    tr.kappa.push_back(1.0 + 0.1 * x);
    tr.kappa_x.push_back(0.1);
  }
  const auto r = rhs_reduced(q, ReducedParams::schrodinger_reduced().with_field(), GridCalculus(g), &tr);
  for (int i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    EXPECT_LT(std::abs(r[static_cast<std::size_t>(i)] - I * (0.5 * (1.0 + 0.1 * x) - 0.05 * x)), 1e-12);
  }
}

TEST(ReducedRhs, CurvatureTraceOfRoundSphereIsOne) {
  const auto u = presets::bump(circle_grid(32));
  const auto tr = curvature_trace(u, GridCalculus(u.grid));
  for (std::size_t i = 0; i < tr.kappa.size(); ++i) {
    EXPECT_DOUBLE_EQ(tr.kappa[i], 1.0);
    EXPECT_NEAR(tr.kappa_x[i], 0.0, 1e-12);
  }
}

TEST(ReducedRhs, JetOrderIsChecked) {
  const auto g = circle_grid(16);
  const auto j = make_jet(presets::plane_wave(g, 1.0, 1.0), GridCalculus(g), 2);
  EXPECT_THROW(rhs_hirota(j, 0.5), ConfigError);
  EXPECT_THROW(rhs_t4th(j, ReducedParams::t4th(0.5, 0.0, 0.0)), ConfigError);
  EXPECT_NO_THROW(rhs_t4th(j, ReducedParams::t4th(0.0, 0.5, 0.5)));
  EXPECT_EQ(jet_order(ReducedParams::fourth_reduced(0.1, 0.0)), 4);
  EXPECT_EQ(jet_order(ReducedParams::hirota(0.0)), 2);
}

TEST(NonlocalAccumulate, TrapezoidStartsAtZero) {
  const auto g = GridSpec::line(11, 1.0, 3.0);
  const auto F = nonlocal_accumulate(std::vector<double>(11, 3.0), g);
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(F[static_cast<std::size_t>(i)], 3.0 * (g.x(i) - 1.0), 1e-14);
}

TEST(EvolveReduced, NlsPlaneWaveIsExact) {
  const auto g = GridSpec::periodic(16, 0.0, 8 * pi);
  const double A = 0.6, k = 1.0;
  EvolutionConfig cfg;
  cfg.t_final = 1.0;
  cfg.dt = 0.05;
  const auto tr = evolve_reduced(presets::plane_wave(g, A, k), ReducedParams::nls(), cfg);
  const double w = 0.5 * A * A - k * k;
  for (int i = 0; i < g.n_points; ++i)
    EXPECT_LT(std::abs(tr.states.back()[static_cast<std::size_t>(i)] - std::polar(A, k * g.x(i) + w)), 1e-6);
}

TEST(EvolveReduced, NlsTimeErrorIsFourthOrder) {
  const auto g = GridSpec::periodic(16, 0.0, 8 * pi);
  auto err = [&](double dt) {
    EvolutionConfig cfg;
    cfg.t_final = 1.0;
    cfg.dt = dt;
    const auto q = evolve_reduced(presets::plane_wave(g, 1.0, 1.0), ReducedParams::nls(), cfg).states.back();
    double m = 0.0;
    for (int i = 0; i < g.n_points; ++i)
      m = std::max(m, std::abs(q[static_cast<std::size_t>(i)] - std::polar(1.0, g.x(i) - 0.5)));
    return m;
  };
  const double e1 = err(0.2), e2 = err(0.1), e3 = err(0.05);
  EXPECT_NEAR(e1 / e2, 16.0, 1.5);
  EXPECT_NEAR(e2 / e3, 16.0, 1.5);
}

TEST(EvolveReduced, MassIsConserved) {
  const auto q0 = presets::random_bandlimited_complex(circle_grid(64), 9, 4, 0.8);
  EvolutionConfig cfg;
  cfg.t_final = 0.2;
  // the fourth-order family has no mass law: its cubic second-derivative term is not a total derivative
  for (const auto& p : {ReducedParams::nls(), ReducedParams::hirota(0.3)}) {
    const auto tr = evolve_reduced(q0, p, cfg);
    EXPECT_NEAR(tr.mass.back(), tr.mass.front(), 1e-8 * tr.mass.front()) << to_string(p.kind);
  }
}

TEST(EvolveReduced, RejectsFieldCurvatureAndLargeDt) {
  const auto q0 = presets::plane_wave(circle_grid(32), 1.0, 1.0);
  EvolutionConfig cfg;
  EXPECT_THROW(evolve_reduced(q0, ReducedParams::t3rd(0.1, 0.0).with_field(), cfg), ConfigError);
  cfg.dt = 1.0;
  EXPECT_THROW(evolve_reduced(q0, ReducedParams::nls(), cfg), ConfigError);
}
