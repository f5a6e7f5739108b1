#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hasimoto/hasimoto.hpp"

namespace fs = std::filesystem;
using namespace hasimoto;
using io::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_blowup = 3;
constexpr int exit_verify = 4;

struct CommonOptions {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::optional<long long> seed;
  std::string input;  // transform only
};

ScenarioConfig load(const CommonOptions& o) {
  std::vector<std::string> ov = o.overrides;
  if (o.seed) {
    if (*o.seed < 0) throw ConfigError("--seed must be >= 0");
    ov.push_back("seed=" + std::to_string(*o.seed));
  }
  auto c = load_scenario(o.config, ov);
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

std::string scenario_name(const CommonOptions& o) {
  return o.config.empty() ? "default" : fs::path(o.config).stem().string();
}

fs::path prepare_out(const ScenarioConfig& c) {
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir: cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

json flow_json(const FlowParams& p) {
  return {{"kind", to_string(p.kind)}, {"a", p.a}, {"b", p.b}, {"c", p.c}, {"C1", p.C1}, {"Cb", p.Cb}};
}

json config_json(const ScenarioConfig& c) {
  json j;
  j["target"] = {{"kind", c.target.kind}, {"metric", c.target.metric}, {"eps", c.target.eps},
                 {"orientation", c.target.orientation}};
  j["grid"] = {{"n", c.grid_n}, {"x_min", c.x_min}, {"x_max", c.x_max}, {"boundary", to_string(c.boundary)},
               {"margin", c.margin}};
  j["flow"] = flow_json(c.flow);
  j["evolution"] = {{"dt", c.dt ? json(*c.dt) : json("auto")}, {"t_final", c.t_final}, {"stride", c.stride},
                    {"projection", to_string(c.projection)}, {"cfl_safety", c.cfl_safety}};
  j["preset"] = {{"name", c.preset}};
  for (const auto& [k, v] : c.preset_params) j["preset"][k] = v;
  j["seed"] = c.seed;
  return j;
}

io::CsvTable table_for(const Trajectory<SphereMap>& tr, const ScenarioConfig&) { return io::trajectory_table(tr); }
io::CsvTable table_for(const Trajectory<ChartMap>& tr, const ScenarioConfig& c) {
  return io::trajectory_table(tr, c.target);
}
io::CsvTable table_for(const Trajectory<FilamentState>& tr, const ScenarioConfig&) { return io::trajectory_table(tr); }

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

int cmd_evolve(const CommonOptions& o) {
  const auto c = load(o);
  const auto u0 = make_initial(c);
  const auto dir = prepare_out(c);
  json run;
  run["command"] = "evolve";
  run["scenario"] = scenario_name(o);
  run["config"] = config_json(c);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::visit(
        [&](const auto& state) {
          const auto tr = evolve(state, c.flow, make_evolution(c));
          io::write_csv_file((dir / "trajectory.csv").string(), table_for(tr, c));
          io::write_csv_file((dir / "diagnostics.csv").string(), io::diagnostics_table(tr));
          run["status"] = "ok";
          run["dt"] = tr.dt;
          run["steps"] = tr.steps;
          run["snapshots"] = tr.times.size();
          const auto& d0 = tr.diagnostics.front();
          const auto& d1 = tr.diagnostics.back();
          run["energy_initial"] = d0.energy;
          run["energy_final"] = d1.energy;
          run["energy_relative_drift"] = io::number(std::abs(d1.energy - d0.energy) / std::max(d0.energy, 1e-300));
          run["membership_defect"] = d1.membership_defect;
          run["arc_length_defect"] = d1.arc_length_defect;
        },
        u0);
  } catch (const BlowUpError& e) {
    run["status"] = "blow-up";
    run["error"] = e.what();
    run["last_valid_time"] = e.last_valid_time();
    io::write_json_file((dir / "run.json").string(), run);
    throw;
  } catch (const RangeError& e) {
    run["status"] = "blow-up";
    run["error"] = e.what();
    io::write_json_file((dir / "run.json").string(), run);
    throw;
  } catch (const DomainError& e) {
    run["status"] = "blow-up";
    run["error"] = e.what();
    io::write_json_file((dir / "run.json").string(), run);
    throw;
  }
  run["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_json_file((dir / "run.json").string(), run);
  std::cout << "evolve: " << run["steps"].get<std::size_t>() << " steps of dt = " << io::format_double(run["dt"].get<double>())
            << ", " << run["snapshots"].get<std::size_t>() << " snapshots written to " << (dir / "trajectory.csv").string()
            << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

template <class S>
json transform_map(const Trajectory<MapField<S>>& tr, io::CsvTable& out, int margin) {
  const GridCalculus calc(tr.states.front().grid);
  const auto e0 = default_anchor(tr.states.front());
  out.columns = {"t", "x", "q_re", "q_im"};
  double gap = 0.0, orth = 0.0, per = 0.0, margin_dev = 0.0;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& u = tr.states[k];
    const auto f = anchored_frame(u, e0, calc);
    const auto q = hasimoto_q(u, f, calc);
    const auto ux = map_derivative(u, calc);
    const auto g = pointwise_inner(u, ux, ux);
    for (std::size_t i = 0; i < u.size(); ++i) {
      out.rows.push_back({tr.times[k], u.grid.x(static_cast<int>(i)), q[i].real(), q[i].imag()});
      gap = std::max(gap, std::abs(std::norm(q[i]) - g[i]));
    }
    orth = std::max(orth, frame_orthonormality(u, f));
    if (u.grid.boundary == Boundary::periodic) per = std::max(per, q_periodicity_defect(u, f, calc));
    margin_dev = std::max(margin_dev, u.margin_deviation(std::max(margin, 1)));
  }
  json j;
  j["q_modulus_gap"] = gap;
  j["frame_orthonormality"] = orth;
  j["q_periodicity_defect"] = per;
  j["margin_deviation"] = margin_dev;
  j["flags"] = {{"margin_flat", margin_dev <= 1e-8}, {"gauge_uncertain", margin_dev > 1e-8}, {"q_periodic", per < 1e-6}};
  return j;
}

json transform_filament(const Trajectory<FilamentState>& tr, io::CsvTable& out) {
  const GridCalculus calc(tr.states.front().grid);
  out.columns = {"t", "x", "q_re", "q_im", "kappa", "curvature_ok", "psi_re", "psi_im"};
  std::size_t flagged = 0, omitted = 0;
  const auto e0 = default_anchor(tangent_map(tr.states.front(), calc));
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& X = tr.states[k];
    const auto u = tangent_map(X, calc);
    const auto q = hasimoto_q(u, anchored_frame(u, e0, calc), calc);
    std::vector<double> kappa(X.size(), 0.0);
    std::vector<bool> ok(X.size(), false);
    std::optional<ComplexField> psi;
    try {
      const auto fd = frenet_frame(X, calc);
      kappa = fd.kappa;
      ok = fd.defined;
      if (fd.undefined_count() == 0) psi = classical_hasimoto(X, calc);
    } catch (const FrameUndefinedError&) {
    }
    if (!psi) ++omitted;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (!ok[i]) ++flagged;
      out.rows.push_back({tr.times[k], X.grid.x(static_cast<int>(i)), q[i].real(), q[i].imag(), kappa[i],
                          ok[i] ? 1.0 : 0.0, psi ? (*psi)[i].real() : nan, psi ? (*psi)[i].imag() : nan});
    }
  }
  json j;
  j["flagged_points"] = flagged;
  j["snapshots_without_psi"] = omitted;
  j["flags"] = {{"curvature_vanishes", flagged > 0}};
  if (omitted > 0) j["note"] = "psi is omitted (nan) on snapshots where the curvature vanishes; q is always produced";
  return j;
}

int cmd_transform(const CommonOptions& o) {
  const auto c = load(o);
  const auto dir = prepare_out(c);
  std::string input = o.input.empty() ? c.transform_input : o.input;
  if (input.empty()) input = (dir / "trajectory.csv").string();
  if (!fs::exists(input)) throw ConfigError("transform.input: cannot read '" + input + "'");
  const auto traj = io::trajectory_from_table(io::read_csv_file(input));
  io::CsvTable out;
  json rep;
  rep["command"] = "transform";
  rep["input"] = input;
  std::visit(
      [&](const auto& tr) {
        using T = std::decay_t<decltype(tr)>;
        out.meta["state"] = "transform";
        io::put_grid_meta(out, tr.states.front().grid);
        if constexpr (std::is_same_v<T, Trajectory<FilamentState>>) rep["diagnostics"] = transform_filament(tr, out);
        else rep["diagnostics"] = transform_map(tr, out, c.margin);
        rep["snapshots"] = tr.times.size();
      },
      traj);
  io::write_csv_file((dir / "q.csv").string(), out);
  io::write_json_file((dir / "transform.json").string(), rep);
  std::cout << "transform: " << rep["snapshots"].get<std::size_t>() << " snapshots written to " << (dir / "q.csv").string()
            << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyRun {
  std::vector<VerificationReport> reports;
  std::vector<std::string> skipped;
};

template <class S>
std::vector<MapField<S>> level_data(const ScenarioConfig& c, bool refine_space) {
  std::vector<MapField<S>> v;
  for (int l = 0; l < c.verify.levels; ++l) {
    const int n = refine_space ? c.grid_n << l : c.grid_n;
    v.push_back(std::get<MapField<S>>(make_initial(c, make_grid(c, n))));
  }
  return v;
}

bool constant_curvature(const ScenarioConfig& c) { return c.target.kind == "sphere" || c.target.metric == "round"; }

template <class S>
void verify_map(const ScenarioConfig& c, const MapField<S>& u0, const std::string& name, VerifyRun& run) {
  const auto evo = make_evolution(c);
  ConvergenceSpec spec;
  spec.expected_ratio = c.verify.expected_ratio;
  spec.band = c.verify.band;
  ResidualOptions<S> ropt;
  ropt.margin = std::max(c.margin, 1);
  ropt.tolerance = c.verify.residual_tolerance;
  const bool t4 = c.flow.kind == FlowKind::fourth_order;

  if (c.verify.invariants) {
    InvariantThresholds th;
    // the fourth-order flow has no energy law
    th.check_energy = !t4;
    th.energy = c.verify.energy_tolerance;
    th.membership = th.orthonormality = th.q_gap = c.verify.identity_tolerance;
    run.reports.push_back(invariant_report(evolve(u0, c.flow, evo), th, name));
  }
  if (c.verify.residual || c.verify.hypothesis) {
    const auto tr = sample_slices(u0, c.flow, c.verify.t_center, c.verify.spacing, evo);
    auto r = t4 ? residual_t4th(tr, c.flow, ropt, name) : residual_t3rd(tr, c.flow, ropt, name);
    if (c.verify.hypothesis) {
      VerificationReport h;
      h.scenario = name;
      h.check = "hypothesis";
      h.times = r.times;
      h.l2 = r.l2;
      h.linf = r.linf;
      h.series["naive_l2"] = r.series.at("naive_l2");
      h.series["A_eff"] = r.series.at("A_eff");
      h.metrics["margin_deviation"] = r.metrics.at("margin_deviation");
      h.flags = r.flags;
      const GridCalculus calc(u0.grid);
      if (u0.grid.boundary == Boundary::periodic) {
        const double d = q_periodicity_defect(u0, anchored_frame(u0, default_anchor(u0), calc), calc);
        h.metrics["q_periodicity_defect"] = d;
        h.flags["q_periodic"] = d < 1e-6;
      }
      h.notes = r.notes;
      h.verdict = r.verdict;
      run.reports.push_back(std::move(h));
    }
    if (c.verify.residual) run.reports.push_back(std::move(r));
  }
  if (c.verify.convergence)
    run.reports.push_back(residual_study(level_data<S>(c, true), c.flow, c.verify.t_center, c.verify.spacing, evo, ropt,
                                         spec, name));
  if (c.verify.commutation) {
    if (!constant_curvature(c)) {
      run.skipped.push_back("commutation: needs a constant-curvature target");
    } else {
      auto ec = evo;
      ec.snapshot_stride = 1 << 30;
      const double dt0 = c.dt ? *c.dt : cfl_bound(u0.grid, c.flow, c.cfl_safety);
      run.reports.push_back(commutation_error(level_data<S>(c, false), c.flow, dt0, ec, spec, name));
    }
  }
}

void verify_filament(const ScenarioConfig& c, const FilamentState& X0, const std::string& name, VerifyRun& run) {
  if (c.verify.invariants) {
    InvariantThresholds th;
    th.check_energy = c.flow.kind == FlowKind::filament_third;
    th.energy = c.verify.energy_tolerance;
    run.reports.push_back(invariant_report(evolve(X0, c.flow, make_evolution(c)), th, name));
  }
  for (const auto& [on, what] : {std::pair{c.verify.residual, "residual"}, {c.verify.convergence, "convergence"},
                                 {c.verify.commutation, "commutation"}, {c.verify.hypothesis, "hypothesis"}})
    if (on) run.skipped.push_back(std::string(what) + ": map flows only");
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string summary_line(const VerificationReport& r) {
  std::string s = r.check + ": " + r.verdict;
  auto list = [](const std::vector<double>& v) {
    std::string t;
    for (double x : v) t += (t.empty() ? "" : " ") + short_number(x);
    return t;
  };
  if (!r.level_l2.empty()) s += " | errors " + list(r.level_l2) + " | orders " + list(r.orders_l2);
  else if (!r.l2.empty()) s += " | max l2 " + short_number(*std::max_element(r.l2.begin(), r.l2.end()));
  for (const auto& [k, v] : r.flags) s += " | " + k + "=" + (v ? "yes" : "no");
  return s;
}

int cmd_verify(const CommonOptions& o) {
  const auto c = load(o);
  const auto u0 = make_initial(c);
  const auto dir = prepare_out(c);
  const std::string name = scenario_name(o);
  VerifyRun run;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FilamentState>) verify_filament(c, s, name, run);
        else verify_map(c, s, name, run);
      },
      u0);

  bool ok = true;
  json rep;
  rep["command"] = "verify";
  rep["scenario"] = name;
  rep["config"] = config_json(c);
  rep["reports"] = json::array();
  std::string summary = "scenario " + name + "\n";
  for (const auto& r : run.reports) {
    rep["reports"].push_back(io::to_json(r));
    summary += "  " + summary_line(r) + "\n";
    for (const auto& n : r.notes) summary += "      note: " + n + "\n";
    ok = ok && r.passed();
  }
  for (const auto& s : run.skipped) summary += "  skipped " + s + "\n";
  rep["skipped"] = run.skipped;
  rep["overall"] = ok ? "pass" : "fail";
  summary += std::string("overall: ") + (ok ? "pass" : "fail") + "\n";
  io::write_json_file((dir / "report.json").string(), rep);
  {
    std::ofstream f(dir / "summary.txt");
    f << summary;
  }
  for (const auto& r : run.reports) {
    io::CsvTable t;
    if (!r.level_l2.empty()) {
      t.columns = {"level", "h", "l2", "linf"};
      for (std::size_t l = 0; l < r.level_l2.size(); ++l)
        t.rows.push_back({static_cast<double>(l), r.levels[l], r.level_l2[l], r.level_linf[l]});
    } else if (!r.l2.empty()) {
      t.columns = {"t", "l2", "linf"};
      for (std::size_t k = 0; k < r.l2.size(); ++k) t.rows.push_back({r.times[k], r.l2[k], r.linf[k]});
    } else {
      continue;
    }
    io::write_csv_file((dir / (r.check + ".csv")).string(), t);
  }
  std::cout << summary;
  return ok ? exit_ok : exit_verify;
}

int cmd_presets() {
  std::cout << presets::listing();
  return exit_ok;
}

void add_common(CLI::App* sub, CommonOptions& o, bool needs_config) {
  auto* opt = sub->add_option("--config", o.config, "scenario file (INI key=value, dotted keys)");
  if (needs_config) opt->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory (overrides output.dir)");
  sub->add_option("--override", o.overrides, "key=value, applied after the config file; repeatable")->take_all();
  sub->add_option("--seed", o.seed, "seed for randomized presets");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersive geometric flows, generalized Hasimoto transforms and their verification"};
  app.require_subcommand(1);
  CommonOptions o;
  auto* evolve_cmd = app.add_subcommand("evolve", "evolve the configured initial data");
  auto* transform_cmd = app.add_subcommand("transform", "compute q (and psi for filaments) from a trajectory file");
  auto* verify_cmd = app.add_subcommand("verify", "run the configured verification checks");
  app.add_subcommand("presets", "list preset initial data");
  add_common(evolve_cmd, o, false);
  add_common(transform_cmd, o, false);
  add_common(verify_cmd, o, false);
  transform_cmd->add_option("--input", o.input, "trajectory CSV (default: transform.input or OUT/trajectory.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (evolve_cmd->parsed()) return cmd_evolve(o);
    if (transform_cmd->parsed()) return cmd_transform(o);
    if (verify_cmd->parsed()) return cmd_verify(o);
    return cmd_presets();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << " (last valid t = " << e.last_valid_time() << ")\n";
    return exit_blowup;
  } catch (const RangeError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return exit_blowup;
  } catch (const DomainError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return exit_blowup;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
