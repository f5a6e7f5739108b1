#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hasimoto/map_field.hpp"
#include "hasimoto/presets.hpp"
#include "hasimoto/surface.hpp"

using namespace hasimoto;
constexpr double pi = std::numbers::pi;

namespace {

double max_norm(const std::vector<Vec3>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, norm(x));
  return m;
}

double max_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, norm(a[i] - b[i]));
  return m;
}

/// Smooth sphere map on a line grid: stereographic image of a Gaussian-modulated chart path.
MapField<UnitSphere> line_map(int n) {
  const auto g = GridSpec::line(n, -4.0, 4.0);
  MapField<UnitSphere> u;
  u.grid = g;
  for (const double x : g.coordinates())
    u.points.push_back(chart_to_sphere(cplx(0.1, 0.2) + 0.6 * std::exp(-x * x) * cplx(std::cos(x), std::sin(2 * x))));
  u.base_point = u.points.front();
  return u;
}

/// kappa = -(1/(2 lambda)) Laplacian(log lambda) by centred finite differences.
double fd_curvature(const ConformalChart& c, cplx z, double h) {
  auto L = [&](cplx w) { return std::log(c.lambda(w)); };
  const double lap = (L(z + h) + L(z - h) + L(z + cplx(0, h)) + L(z - cplx(0, h)) - 4.0 * L(z)) / (h * h);
  return -lap / (2.0 * c.lambda(z));
}

}  // namespace

TEST(ApplyJ, SphereAxisCrossProduct) {
  const UnitSphere s;
  const Vec3 v = s.apply_J({0, 0, 1}, {1, 0, 0});
  EXPECT_NEAR(v.x, 0.0, 1e-15);
  EXPECT_NEAR(v.y, 1.0, 1e-15);
  EXPECT_NEAR(v.z, 0.0, 1e-15);
}

TEST(ApplyJ, ChartMultipliesByI) {
  const ConformalChart c;
  EXPECT_EQ(c.apply_J(cplx(0.3, 0.1), cplx(1.0, 0.0)), cplx(0.0, 1.0));
  const ConformalChart reversed(round_metric(), -1);
  EXPECT_EQ(reversed.apply_J(cplx(0.3, 0.1), cplx(1.0, 0.0)), cplx(0.0, -1.0));
}

TEST(ApplyJ, SquaresToMinusIdentityAndIsAnIsometry) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  const UnitSphere s;
  const ConformalChart c(perturbed_round_metric(0.4));
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 u = normalized(Vec3{n01(rng), n01(rng), n01(rng)});
    const Vec3 v = s.project_tangent(u, {n01(rng), n01(rng), n01(rng)});
    const Vec3 w = s.project_tangent(u, {n01(rng), n01(rng), n01(rng)});
    EXPECT_LT(norm(s.apply_J(u, s.apply_J(u, v)) + v), 1e-13);
    EXPECT_NEAR(s.inner(u, s.J(u, v), s.J(u, w)), s.inner(u, v, w), 1e-12);
    EXPECT_NEAR(s.inner(u, v, s.J(u, v)), 0.0, 1e-13);

    const cplx z(0.5 * n01(rng), 0.5 * n01(rng));
    const cplx a(n01(rng), n01(rng)), b(n01(rng), n01(rng));
    EXPECT_LT(std::abs(c.apply_J(z, c.apply_J(z, a)) + a), 1e-14);
    EXPECT_NEAR(c.inner(z, c.J(z, a), c.J(z, b)), c.inner(z, a, b), 1e-12);
    EXPECT_NEAR(c.inner(z, a, c.J(z, a)), 0.0, 1e-12);
  }
}

TEST(ApplyJ, RejectsNonTangentVector) {
  const UnitSphere s;
  EXPECT_THROW(s.apply_J({0, 0, 1}, {0.0, 0.5, 1.0}), DomainError);
}

TEST(MetricInner, SphereAndRoundChartValues) {
  EXPECT_DOUBLE_EQ(UnitSphere::inner({1, 0, 0}, {0, 1, 0}, {0, 1, 0}), 1.0);
  const ConformalChart c;
  EXPECT_DOUBLE_EQ(c.inner(0.0, 1.0, 1.0), 4.0);
}

TEST(MetricInner, RoundChartAgreesWithSphereThroughPushforward) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const ConformalChart c;
  for (int trial = 0; trial < 30; ++trial) {
    const cplx z(n01(rng), n01(rng));
    const cplx v(n01(rng), n01(rng)), w(n01(rng), n01(rng));
    const double sphere = dot(chart_pushforward(z, v), chart_pushforward(z, w));
    EXPECT_NEAR(c.inner(z, v, w), sphere, 1e-12 * std::max(1.0, std::abs(sphere)));
  }
}

TEST(GaussianCurvature, SphereIsOne) {
  EXPECT_EQ(gaussian_curvature(UnitSphere{}, Vec3{0.6, 0.0, 0.8}), 1.0);
}

TEST(GaussianCurvature, RoundChartIsOneAtRandomPoints) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  const ConformalChart c;
  for (int i = 0; i < 100; ++i) {
    const cplx z(2.0 * n01(rng), 2.0 * n01(rng));
    EXPECT_NEAR(gaussian_curvature(c, z), 1.0, 1e-10);
  }
}

TEST(GaussianCurvature, PerturbedMetricWithZeroEpsilonIsRound) {
  const ConformalChart c(perturbed_round_metric(0.0));
  for (double r : {0.0, 0.3, 1.0, 2.5}) EXPECT_NEAR(c.curvature(cplx(r, -0.5 * r)), 1.0, 1e-12);
}

TEST(GaussianCurvature, AnalyticFormulaMatchesFiniteDifferenceLaplacian) {
  const ConformalChart c(perturbed_round_metric(0.5));
  for (cplx z : {cplx(0.0, 0.0), cplx(0.3, -0.2), cplx(1.1, 0.4), cplx(-0.7, 0.9)}) {
    EXPECT_NEAR(c.curvature(z), fd_curvature(c, z, 1e-3), 1e-5);
  }
  EXPECT_GT(std::abs(c.curvature(0.0) - 1.0), 0.1);
}

TEST(GaussianCurvature, NonPositiveDensityIsADomainError) {
  MetricDensity bad = round_metric();
  bad.value = [](cplx) { return -1.0; };
  const ConformalChart c(bad);
  EXPECT_THROW(c.curvature(0.0), DomainError);
  EXPECT_THROW(perturbed_round_metric(-1.5), ConfigError);
}

TEST(ChartMaps, ConventionValues) {
  const Vec3 s = chart_to_sphere(0.0);
  EXPECT_NEAR(s.z, -1.0, 1e-15);
  const Vec3 e = chart_to_sphere(1.0);
  EXPECT_NEAR(e.x, 1.0, 1e-15);
  EXPECT_NEAR(e.y, 0.0, 1e-15);
  EXPECT_NEAR(e.z, 0.0, 1e-15);
  EXPECT_THROW(sphere_to_chart({0, 0, 1}), PoleError);
}

TEST(ChartMaps, RoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 100; ++i) {
    const cplx z(n01(rng), n01(rng));
    EXPECT_LT(std::abs(sphere_to_chart(chart_to_sphere(z)) - z), 1e-12 * std::max(1.0, std::abs(z)));
  }
}

TEST(ChartMaps, ChartJMatchesSphereCrossProductWithReversedOrientation) {
  const ConformalChart c(round_metric(), -1);
  const cplx z(0.4, -0.3), v(0.7, 0.2);
  const Vec3 u = chart_to_sphere(z);
  const Vec3 lhs = chart_pushforward(z, c.J(z, v));
  const Vec3 rhs = cross(u, chart_pushforward(z, v));
  EXPECT_LT(norm(lhs - rhs), 1e-13);
}

TEST(CovariantDerivative, GreatCircleVelocityIsParallel) {
  const auto u = presets::great_circle(GridSpec::periodic(64, 0.0, 2 * pi));
  const GridCalculus calc(u.grid);
  const auto ux = map_derivative(u, calc);
  EXPECT_LT(max_norm(covariant_derivative_x(u, ux, calc).values), 1e-12);
  TangentField<UnitSphere> normal{std::vector<Vec3>(u.size(), Vec3{0, 0, 1})};
  EXPECT_LT(max_norm(covariant_derivative_x(u, normal, calc).values), 1e-12);
}

TEST(CovariantDerivative, DoubleSpeedGreatCircle) {
  const auto u = presets::great_circle(GridSpec::periodic(64, 0.0, 2 * pi), 2.0);
  const GridCalculus calc(u.grid);
  const auto ux = map_derivative(u, calc);
  EXPECT_LT(max_norm(covariant_derivative_x(u, ux, calc).values), 1e-11);
}

TEST(CovariantDerivative, CoarseGridWarnsInsteadOfFailing) {
  const auto u = presets::great_circle(GridSpec::periodic(8, 0.0, 2 * pi));
  const GridCalculus calc(u.grid);
  Diagnostics diag;
  covariant_derivative_x(u, map_derivative(u, calc), calc, &diag);
  EXPECT_FALSE(diag.warnings.empty());
}

TEST(CovariantTower, GreatCircleAndConstantMapVanish) {
  for (const auto& u : {presets::great_circle(GridSpec::periodic(64, 0.0, 2 * pi)),
                        presets::constant_map(GridSpec::periodic(64, 0.0, 2 * pi))}) {
    const auto t = covariant_tower(u, GridCalculus(u.grid));
    EXPECT_LT(max_norm(t.d1.values), 1e-11);
    EXPECT_LT(max_norm(t.d2.values), 1e-10);
    EXPECT_LT(max_norm(t.d3.values), 1e-9);
  }
}

TEST(CovariantTower, ClosedFormsMatchIteratedOperatorSpectrally) {
  const auto u = presets::random_bandlimited(GridSpec::periodic(128, 0.0, 2 * pi), 42, 4, 0.5);
  const GridCalculus calc(u.grid);
  const auto closed = covariant_tower(u, calc);
  const auto iter = iterated_covariant_tower(u, calc);
  EXPECT_LT(max_diff(closed.d1.values, iter.d1.values), 1e-10);
  EXPECT_LT(max_diff(closed.d2.values, iter.d2.values), 1e-9);
  EXPECT_LT(max_diff(closed.d3.values, iter.d3.values), 1e-8);
}

TEST(CovariantTower, ClosedFormsMatchIteratedOperatorAtStencilOrder) {
  std::array<double, 3> err{};
  for (int l = 0; l < 3; ++l) {
    const auto u = line_map(101 * (1 << l) - ((1 << l) - 1));
    const GridCalculus calc(u.grid);
    const auto closed = covariant_tower(u, calc);
    const auto iter = iterated_covariant_tower(u, calc);
    err[static_cast<std::size_t>(l)] = max_diff(closed.d2.values, iter.d2.values);
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 3.5);
  EXPECT_GT(std::log2(err[1] / err[2]), 3.5);
}

TEST(CovariantTower, TowerIsTangent) {
  const auto u = presets::random_bandlimited(GridSpec::periodic(128, 0.0, 2 * pi), 9, 3, 0.8);
  const auto t = covariant_tower(u, GridCalculus(u.grid));
  EXPECT_LT(tangency_defect(u, t.d1), 1e-10);
  EXPECT_LT(tangency_defect(u, t.d2), 1e-9);
  EXPECT_LT(tangency_defect(u, t.d3), 1e-8);
}

TEST(CovariantDerivative, MetricCompatibilityOnRandomFields) {
  const auto u = presets::random_bandlimited(GridSpec::periodic(128, 0.0, 2 * pi), 21, 4, 0.6);
  const GridCalculus calc(u.grid);
  const auto ux = map_derivative(u, calc);
  const auto t = covariant_tower(u, calc);
  TangentField<UnitSphere> W;
  for (std::size_t i = 0; i < u.size(); ++i) W.values.push_back(cross(u.points[i], ux[i]) + 0.3 * t.d1[i]);
  const auto lhs = calc.derivative(pointwise_inner(u, ux, W), 1);
  const auto dV = covariant_derivative_x(u, ux, ux, calc);
  const auto dW = covariant_derivative_x(u, ux, W, calc);
  for (std::size_t i = 0; i < u.size(); ++i)
    EXPECT_NEAR(lhs[i], dot(dV[i], W[i]) + dot(ux[i], dW[i]), 1e-9);
}

TEST(CovariantDerivative, ChartAndSphereAgreeThroughStereographicMap) {
  const auto zf = presets::random_bandlimited_chart(GridSpec::periodic(128, 0.0, 2 * pi), 4, 3, 0.7,
                                                    ConformalChart(round_metric(), -1));
  const auto u = to_sphere(zf);
  const GridCalculus calc(u.grid);
  const auto tz = covariant_tower(zf, calc);
  const auto tu = covariant_tower(u, calc);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_LT(norm(chart_pushforward(zf.points[i], tz.d1[i]) - tu.d1[i]), 1e-9);
    EXPECT_LT(norm(chart_pushforward(zf.points[i], tz.d2[i]) - tu.d2[i]), 1e-8);
    EXPECT_LT(norm(chart_pushforward(zf.points[i], tz.d3[i]) - tu.d3[i]), 1e-7);
  }
}

TEST(MapField, LineMarginCheck) {
  auto u = presets::constant_map(GridSpec::line(32, -5.0, 5.0));
  EXPECT_TRUE(u.margin_flat(4, 1e-12));
  u.points[1] = normalized(Vec3{0.1, 0.0, -1.0});
  EXPECT_FALSE(u.margin_flat(4, 1e-12));
  EXPECT_TRUE(u.margin_flat(1, 1e-12));
}

TEST(MapField, ValidateRejectsOffSphere) {
  auto u = presets::constant_map(GridSpec::periodic(16, 0.0, 1.0));
  EXPECT_NO_THROW(u.validate());
  u.points[3] = {0.0, 0.0, -1.1};
  EXPECT_THROW(u.validate(), DomainError);
}
