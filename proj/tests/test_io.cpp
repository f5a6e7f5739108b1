#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hasimoto/config.hpp"
#include "hasimoto/io.hpp"
#include "hasimoto/presets.hpp"

using namespace hasimoto;
constexpr double pi = std::numbers::pi;

namespace {

ScenarioConfig scenario(const std::string& text) { return scenario_from_ini(IniFile::parse_string(text, "test.ini")); }

std::string config_error(const std::string& text) {
  try {
    scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

template <class T>
T round_trip(const io::CsvTable& t) {
  std::stringstream ss;
  io::write_csv(ss, t);
  return std::get<T>(io::trajectory_from_table(io::read_csv(ss)));
}

}  // namespace

TEST(Ini, SectionsCommentsAndDottedKeys) {
  const auto ini = IniFile::parse_string("# comment\nflow.kind = third_order\n[grid]\nn = 64 ; trailing\n\n[flow]\na=1\n");
  ASSERT_EQ(ini.entries().size(), 3u);
  EXPECT_EQ(ini.entries().at("flow.kind").value, "third_order");
  EXPECT_EQ(ini.entries().at("grid.n").value, "64");
  EXPECT_EQ(ini.entries().at("flow.a").origin, "config:7");
}

TEST(Ini, ErrorsCiteTheLine) {
  try {
    IniFile::parse_string("grid.n=64\nnonsense\n", "a.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("a.ini:2"), std::string::npos);
  }
  EXPECT_THROW(IniFile::parse_string("a=1\na=2\n"), ConfigError);
  EXPECT_THROW(IniFile::parse_string("[broken\n"), ConfigError);
  EXPECT_THROW(IniFile::load("/nonexistent/config.ini"), ConfigError);
}

TEST(Ini, OverrideReplacesValue) {
  auto ini = IniFile::parse_string("grid.n=64\n");
  ini.apply_override("grid.n=128");
  ini.apply_override("flow.kind = fourth_order");
  EXPECT_EQ(ini.entries().at("grid.n").value, "128");
  EXPECT_EQ(ini.entries().at("grid.n").origin, "--override");
  EXPECT_EQ(scenario_from_ini(ini).flow.kind, FlowKind::fourth_order);
  EXPECT_THROW(ini.apply_override("grid.n"), ConfigError);
  EXPECT_THROW(ini.apply_override("=3"), ConfigError);
}

TEST(Scenario, Defaults) {
  const auto c = scenario("");
  EXPECT_EQ(c.target.kind, "sphere");
  EXPECT_EQ(c.grid_n, 256);
  EXPECT_DOUBLE_EQ(c.x_max, 2 * pi);
  EXPECT_EQ(c.flow.kind, FlowKind::schrodinger_map);
  EXPECT_EQ(c.preset, "bump");
  EXPECT_FALSE(c.dt.has_value());
  EXPECT_DOUBLE_EQ(c.t_final, 0.1);
  EXPECT_EQ(c.verify.levels, 3);
}

TEST(Scenario, PiValues) {
  const auto c = scenario("grid.x_min=-pi\ngrid.x_max=2*pi\npreset.center=pi/2\n");
  EXPECT_DOUBLE_EQ(c.x_min, -pi);
  EXPECT_DOUBLE_EQ(c.x_max, 2 * pi);
  EXPECT_DOUBLE_EQ(c.preset_params.at("center"), pi / 2);
  EXPECT_DOUBLE_EQ(scenario("grid.x_max=8pi\n").x_max, 8 * pi);
  EXPECT_DOUBLE_EQ(scenario("grid.x_max=2*pi*sqrt(2)\n").x_max, 2 * pi * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(scenario("grid.x_max=1e1/4\n").x_max, 2.5);
  EXPECT_DOUBLE_EQ(scenario("grid.x_max=+3\n").x_max, 3.0);
  for (const char* bad : {"2*po", "", "1/0", "sqrt(-1)", "2**pi", "3x", "pi pi"})
    EXPECT_NE(config_error(std::string("grid.x_max=") + bad + "\n").find("grid.x_max"), std::string::npos) << bad;
}

TEST(Scenario, CoefficientMaps) {
  const auto fm = scenario("flow.kind=third_order\nflow.fm_a=1\n").flow;
  EXPECT_DOUBLE_EQ(fm.a, 1.0);
  EXPECT_DOUBLE_EQ(fm.b, 0.5);
  const auto f = scenario("flow.kind=fourth_order\nflow.C1=0.05\nflow.Cb=0.1\n").flow;
  EXPECT_DOUBLE_EQ(f.a, 0.05);
  EXPECT_DOUBLE_EQ(f.b, 0.05);
  EXPECT_DOUBLE_EQ(f.c, 0.25);
  const auto direct = scenario("flow.kind=fourth_order\nflow.a=0.1\nflow.b=0.2\nflow.c=0.3\n").flow;
  EXPECT_DOUBLE_EQ(direct.c, 0.3);
}

TEST(Scenario, BadInputNamesTheKey) {
  EXPECT_NE(config_error("flow.kind=kdv\n").find("flow.kind"), std::string::npos);
  EXPECT_NE(config_error("grid.n=sixty\n").find("grid.n"), std::string::npos);
  EXPECT_NE(config_error("grid.n=sixty\n").find("test.ini:1"), std::string::npos);
  EXPECT_NE(config_error("grid.colour=red\n").find("grid.colour"), std::string::npos);
  EXPECT_NE(config_error("preset.name=torus\n").find("hasimoto presets"), std::string::npos);
  EXPECT_NE(config_error("grid.margin=-1\n").find("grid.margin"), std::string::npos);
  EXPECT_NE(config_error("evolution.dt=-1\n").find("evolution.dt"), std::string::npos);
  EXPECT_FALSE(config_error("flow.kind=third_order\nflow.fm_a=1\nflow.a=1\n").empty());
  EXPECT_FALSE(config_error("flow.a=1\n").empty());
  EXPECT_FALSE(config_error("flow.kind=filament_third\n").empty());
  EXPECT_FALSE(config_error("target.metric=perturbed\n").empty());
  EXPECT_TRUE(config_error("evolution.dt=auto\n").empty());
}

TEST(Scenario, InitialStates) {
  const auto s = make_initial(scenario("grid.n=32\npreset.name=great_circle\n"));
  ASSERT_TRUE(std::holds_alternative<SphereMap>(s));
  const auto c = make_initial(scenario("grid.n=32\ntarget.kind=chart\ntarget.metric=perturbed\n"));
  ASSERT_TRUE(std::holds_alternative<ChartMap>(c));
  EXPECT_EQ(std::get<ChartMap>(c).surface.metric->name, "perturbed");
  const auto f = make_initial(scenario("grid.n=64\ngrid.x_max=2*pi\nflow.kind=filament_third\npreset.name=circle\n"));
  ASSERT_TRUE(std::holds_alternative<FilamentState>(f));
}

TEST(Scenario, RandomPresetIsDeterministicInSeed) {
  const std::string text = "grid.n=32\npreset.name=random_bandlimited\nseed=7\n";
  const auto a = std::get<SphereMap>(make_initial(scenario(text)));
  const auto b = std::get<SphereMap>(make_initial(scenario(text)));
  const auto c = std::get<SphereMap>(make_initial(scenario(text + "preset.k_max=4\nverify.levels=3\n")));
  const auto d = std::get<SphereMap>(make_initial(scenario("grid.n=32\npreset.name=random_bandlimited\nseed=8\n")));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.points[i].x, b.points[i].x);
    EXPECT_EQ(a.points[i].z, c.points[i].z);
  }
  EXPECT_NE(a.points[3].x, d.points[3].x);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isnan(io::parse_double(io::format_double(std::nan("")), "t")));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = U(rng) * std::pow(10.0, static_cast<int>(U(rng) * 300));
    EXPECT_EQ(io::parse_double(io::format_double(v), "t"), v);
  }
  EXPECT_THROW(io::parse_double("1.5x", "t"), ConfigError);
}

TEST(Csv, TableRoundTripAndErrors) {
  io::CsvTable t;
  t.meta["kind"] = "demo";
  t.columns = {"a", "b"};
  t.rows = {{1.0 / 3.0, -2e-300}, {std::numeric_limits<double>::infinity(), 5.0}};
  std::stringstream ss;
  io::write_csv(ss, t);
  const auto r = io::read_csv(ss);
  EXPECT_EQ(r.meta.at("kind"), "demo");
  EXPECT_EQ(r.columns, t.columns);
  EXPECT_EQ(r.rows, t.rows);
  std::stringstream bad("a,b\n1,2,3\n");
  EXPECT_THROW(io::read_csv(bad), ConfigError);
  std::stringstream empty("# only=meta\n");
  EXPECT_THROW(io::read_csv(empty), ConfigError);
}

TEST(Csv, SphereTrajectoryRoundTripIsExact) {
  const auto u = presets::bump(GridSpec::periodic(32, 0.0, 2 * pi));
  EvolutionConfig cfg;
  cfg.t_final = 0.01;
  cfg.snapshot_stride = 5;
  const auto tr = evolve(u, FlowParams::schrodinger_map(), cfg);
  const auto back = round_trip<Trajectory<SphereMap>>(io::trajectory_table(tr));
  ASSERT_EQ(back.times, tr.times);
  EXPECT_EQ(back.states.front().grid, u.grid);
  EXPECT_EQ(back.states.back().base_point.z, u.base_point.z);
  for (std::size_t k = 0; k < tr.states.size(); ++k)
    for (std::size_t i = 0; i < u.size(); ++i) {
      EXPECT_EQ(back.states[k].points[i].x, tr.states[k].points[i].x);
      EXPECT_EQ(back.states[k].points[i].z, tr.states[k].points[i].z);
    }
}

TEST(Csv, ChartAndFilamentRoundTrip) {
  TargetSpec target;
  target.kind = "chart";
  target.metric = "perturbed";
  target.eps = 0.3;
  Trajectory<ChartMap> tc;
  tc.times = {0.0};
  tc.states = {presets::bump_chart(GridSpec::line(17, -1.0, 1.0), {}, make_chart(target))};
  const auto bc = round_trip<Trajectory<ChartMap>>(io::trajectory_table(tc, target));
  EXPECT_EQ(bc.states[0].points, tc.states[0].points);
  EXPECT_EQ(bc.states[0].grid.boundary, Boundary::line_truncated);
  EXPECT_DOUBLE_EQ(bc.states[0].surface.lambda(0.5), tc.states[0].surface.lambda(0.5));

  Trajectory<FilamentState> tf;
  tf.times = {0.25};
  tf.states = {presets::helix(GridSpec::periodic(16, 0.0, 2 * pi * std::sqrt(2.0)))};
  const auto bf = round_trip<Trajectory<FilamentState>>(io::trajectory_table(tf));
  EXPECT_EQ(bf.states[0].period_offset.z, tf.states[0].period_offset.z);
  EXPECT_EQ(bf.states[0].X[5].y, tf.states[0].X[5].y);
}

TEST(Csv, TrajectorySchemaErrors) {
  io::CsvTable t;
  t.columns = {"t", "x", "u1", "u2", "u3"};
  EXPECT_THROW(io::trajectory_from_table(t), ConfigError);
  t.meta = {{"state", "sphere"}, {"grid.n", "2"}, {"grid.x_min", "0"}, {"grid.x_max", "1"}, {"grid.boundary", "line"},
            {"base_point", "0 0 1"}};
  t.rows = {{0, 0, 0, 0, 1}, {0.5, 1, 0, 0, 1}};
  EXPECT_THROW(io::trajectory_from_table(t), ConfigError);
  t.rows.pop_back();
  EXPECT_THROW(io::trajectory_from_table(t), ConfigError);
}

TEST(Json, ReportRoundTripWithInfinity) {
  VerificationReport r;
  r.scenario = "s";
  r.check = "c";
  r.levels = {1.0, 0.5, 0.25};
  r.level_l2 = {1e-3, 1.0 / 3.0, 2e-15};
  r.orders_l2 = {std::numeric_limits<double>::infinity(), 4.0};
  r.metrics["x"] = 0.1;
  r.series["y"] = {1.0, 2.0};
  r.flags["gauge_uncertain"] = true;
  r.notes = {"note"};
  const auto text = io::dump(io::to_json(r));
  EXPECT_NE(text.find("\"inf\""), std::string::npos);
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
  const auto back = io::report_from_json(io::json::parse(text));
  EXPECT_EQ(back.level_l2, r.level_l2);
  EXPECT_TRUE(std::isinf(back.orders_l2[0]));
  EXPECT_EQ(back.metrics, r.metrics);
  EXPECT_EQ(back.series, r.series);
  EXPECT_EQ(back.flags, r.flags);
  EXPECT_EQ(back.notes, r.notes);
  EXPECT_THROW(io::report_from_json(io::json::object()), ConfigError);
}
