// Command-line front end: spectrum evaluation, phase-diagram scans,
// time-domain simulation, growth-rate measurement, figure presets, and
// the self-validation suites.
//
// Exit codes: 0 success, 1 computation/validation failure, 2 usage
// error, 3 divergence.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "dnls/bogoliubov.hpp"
#include "dnls/experiments.hpp"
#include "dnls/integrator.hpp"
#include "dnls/model.hpp"
#include "dnls/stability_map.hpp"
#include "dnls/validation.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;

struct ModelFlags {
  double K = 1.0;
  double lambda1 = 100.0;
  double lambda2 = 100.298;
  double lambda12 = 99.3;

  void attach(CLI::App* cmd) {
    cmd->add_option("--K", K, "Hopping energy (K1 = K2)");
    cmd->add_option("--lambda1", lambda1, "Intra-species interaction, species 1");
    cmd->add_option("--lambda2", lambda2, "Intra-species interaction, species 2");
    cmd->add_option("--lambda12", lambda12, "Inter-species interaction");
  }

  dnls::ModelParams params() const {
    return dnls::ModelParams{K, K, lambda1, lambda2, lambda12};
  }
};

struct WaveFlags {
  double k = 0.0;
  double q = 0.0;
  long l = -1;
  long s = -1;
  std::size_t sites = 400;

  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "Carrier wave number (radians/site)");
    cmd->add_option("--q", q, "Perturbation wave number (radians/site)");
    cmd->add_option("--l", l, "Carrier wave index (k = 2 pi l / sites)");
    cmd->add_option("--s", s, "Perturbation wave index (q = 2 pi s / sites)");
    cmd->add_option("--sites", sites, "Lattice site count for index form");
  }

  // Index form wins when both l and s are given.
  void resolve() {
    const dnls::LatticeConfig lattice{sites};
    lattice.validate();
    if (l >= 0) k = lattice.wave_number(l);
    if (s >= 0) q = lattice.wave_number(s);
  }
};

json spectrum_to_json(const dnls::SpectrumResult& r,
                      const dnls::StabilityClass& cls) {
  json branches = json::array();
  for (const dnls::cplx& w : r.omega)
    branches.push_back({{"re", w.real()}, {"im", w.imag()}});
  return json{{"eps_q", r.epsilon},
              {"delta1", r.delta1},
              {"delta2", r.delta2},
              {"omega", branches},
              {"growth1", r.growth1},
              {"growth2", r.growth2},
              {"class", cls.label()}};
}

int cmd_spectrum(const ModelFlags& model, WaveFlags& wave, double psi0sq,
                 bool as_json) {
  wave.resolve();
  const dnls::ModelParams params = model.params();
  params.validate();
  const dnls::CarrierSpec carrier =
      dnls::make_carrier_equal(params, wave.k, psi0sq);
  const dnls::SpectrumResult r = dnls::spectrum(params, carrier, wave.q);
  const auto cls = dnls::StabilityClass::from_growth(r.growth1, r.growth2);

  if (as_json) {
    json out = spectrum_to_json(r, cls);
    out["k"] = wave.k;
    out["q"] = wave.q;
    out["mu1"] = carrier.mu1;
    out["mu2"] = carrier.mu2;
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  }
  std::printf("k        = %.9g\nq        = %.9g\n", wave.k, wave.q);
  std::printf("eps_q    = %.9g\n", r.epsilon);
  std::printf("delta1   = %.9g\ndelta2   = %.9g\n", r.delta1, r.delta2);
  static const char* names[4] = {"omega1-", "omega1+", "omega2-", "omega2+"};
  for (int i = 0; i < 4; ++i)
    std::printf("%s  = %.9g %+.9gi\n", names[i],
                r.omega[static_cast<std::size_t>(i)].real(),
                r.omega[static_cast<std::size_t>(i)].imag());
  std::printf("growth1  = %.9g\ngrowth2  = %.9g\n", r.growth1, r.growth2);
  std::printf("class    = %s\n", cls.label().c_str());
  return kExitOk;
}

int cmd_phase_diagram(const ModelFlags& model, double psi0sq,
                      std::size_t k_steps, std::size_t q_steps,
                      const std::string& preset_name, const std::string& out,
                      unsigned workers, bool strict, bool as_json) {
  dnls::ModelParams params = model.params();
  dnls::GridSpec grid;
  grid.k_steps = k_steps;
  grid.q_steps = q_steps;
  if (!preset_name.empty()) {
    const auto preset = dnls::parse_preset(preset_name);
    if (!preset || (*preset != dnls::Preset::Fig1a &&
                    *preset != dnls::Preset::Fig1b)) {
      std::cerr << "phase-diagram: preset must be fig1a or fig1b\n";
      return kExitUsage;
    }
    const dnls::PresetDef def = dnls::preset_definition(*preset);
    params = def.params;
    grid = def.grid;
    psi0sq = dnls::preset_psi0_sq();
  }

  const dnls::StabilityGrid result =
      dnls::scan_plane(params, psi0sq, grid, workers);
  dnls::export_csv(result, out);

  const auto counts = dnls::class_counts(result);
  if (as_json) {
    json j{{"out", out},
           {"cells", result.cells.size()},
           {"failed", result.failed_count()},
           {"classes", json::object()}};
    for (const auto& [label, count] : counts) j["classes"][label] = count;
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("wrote %s (%zu cells)\n", out.c_str(), result.cells.size());
    for (const auto& [label, count] : counts)
      std::printf("  %-14s %zu\n", label.c_str(), count);
  }
  if (strict && result.failed_count() > 0) return kExitComputation;
  return kExitOk;
}

// Full dynamics configuration, assembled preset -> config file -> flags.
struct RunSetup {
  dnls::ModelParams params = dnls::miscible_params();
  dnls::ModulatedStateSpec state;
  dnls::IntegratorConfig integ;
  dnls::GrowthFitConfig fit;
  double expected_rate = 0.0;

  RunSetup() {
    state.A = dnls::preset_background();
    state.alpha = 0.05 * state.A;
    state.sites = dnls::preset_sites;
    state.l = 150;
    state.s = 50;
    integ.t_end = 60.0;
    integ.observe_every = 10;
    integ.density_every = 50;
  }

  void apply_json(const json& j) {
    if (j.contains("model")) {
      const json& m = j["model"];
      params.K1 = m.value("K1", params.K1);
      params.K2 = m.value("K2", params.K2);
      params.Lambda11 = m.value("lambda11", params.Lambda11);
      params.Lambda22 = m.value("lambda22", params.Lambda22);
      params.Lambda12 = m.value("lambda12", params.Lambda12);
    }
    if (j.contains("state")) {
      const json& s = j["state"];
      state.A = s.value("A", state.A);
      state.alpha = s.value("alpha", state.alpha);
      state.l = s.value("l", state.l);
      state.s = s.value("s", state.s);
      state.sites = s.value("sites", state.sites);
    }
    if (j.contains("integrator")) {
      const json& i = j["integrator"];
      integ.dt = i.value("dt", integ.dt);
      integ.t_end = i.value("t_end", integ.t_end);
      integ.observe_every = i.value("observe_every", integ.observe_every);
      integ.norm_drift_tol = i.value("norm_drift_tol", integ.norm_drift_tol);
      integ.energy_drift_tol =
          i.value("energy_drift_tol", integ.energy_drift_tol);
      integ.density_every = i.value("density_every", integ.density_every);
    }
    if (j.contains("fit")) {
      const json& f = j["fit"];
      fit.lo_mult = f.value("lo_mult", fit.lo_mult);
      fit.hi_frac = f.value("hi_frac", fit.hi_frac);
      fit.lo_frac = f.value("lo_frac", fit.lo_frac);
      fit.min_samples = f.value("min_samples", fit.min_samples);
    }
  }

  void refresh_expected_rate() {
    const auto carrier = dnls::make_carrier_equal(params, state.k(),
                                                  state.A * state.A);
    const auto spec = dnls::spectrum(params, carrier, state.q());
    expected_rate = std::max(spec.growth1, spec.growth2);
  }
};

int run_dynamics(const std::string& preset_name,
                 const std::string& config_path, const fs::path& out_dir,
                 bool check_rate, double expect, double rtol, bool as_json) {
  RunSetup setup;
  if (!preset_name.empty()) {
    const auto preset = dnls::parse_preset(preset_name);
    if (!preset) {
      std::cerr << "unknown preset: " << preset_name << '\n';
      return kExitUsage;
    }
    if (*preset == dnls::Preset::Fig1a || *preset == dnls::Preset::Fig1b) {
      std::cerr << "preset " << preset_name
                << " is a phase-diagram preset; use phase-diagram\n";
      return kExitUsage;
    }
    const dnls::PresetDef def = dnls::preset_definition(*preset);
    setup.params = def.params;
    setup.state = def.state;
    setup.integ = def.integ;
    setup.fit = def.fit;
    setup.expected_rate = def.expected_rate;
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << config_path << '\n';
      return kExitUsage;
    }
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      std::cerr << "bad config file: " << e.what() << '\n';
      return kExitUsage;
    }
    setup.apply_json(j);
    setup.refresh_expected_rate();
  }
  if (preset_name.empty() && config_path.empty())
    setup.refresh_expected_rate();

  fs::create_directories(out_dir);
  dnls::LatticeState state = dnls::build_modulated_state(setup.state);
  const dnls::Trajectory traj =
      dnls::evolve(std::move(state), setup.params, setup.integ,
                   dnls::sideband_hook(setup.state.l, setup.state.s));

  dnls::write_jsonl(traj, out_dir / "trajectory.jsonl");
  dnls::write_density_csv(traj, 1, out_dir / "density_s1.csv");
  dnls::write_density_csv(traj, 2, out_dir / "density_s2.csv");

  dnls::GrowthFit fit;
  bool have_fit = false;
  if (!traj.samples.empty()) {
    fit = dnls::measure_growth_rate(traj, setup.state.A, setup.expected_rate,
                                    setup.fit);
    have_fit = true;
    dnls::detail::write_growthfit_json(fit, out_dir / "growthfit.json");
  }

  json report{{"out", out_dir.string()},
              {"status", traj.status == dnls::RunStatus::Completed
                             ? "completed"
                             : (traj.status == dnls::RunStatus::Diverged
                                    ? "diverged"
                                    : "drift_exceeded")},
              {"last_time", traj.last_time},
              {"samples", traj.samples.size()}};
  if (have_fit) {
    report["growth"] = {{"rate", {fit.rate[0], fit.rate[1]}},
                        {"analytic_rate", fit.analytic_rate},
                        {"relative_error", fit.relative_error()},
                        {"no_growth", fit.no_growth},
                        {"unfittable", fit.unfittable}};
  }

  int code = kExitOk;
  if (traj.status == dnls::RunStatus::Diverged) {
    code = kExitDivergence;
  } else if (traj.status == dnls::RunStatus::DriftExceeded) {
    code = kExitComputation;
  } else if (check_rate && have_fit) {
    const double fitted = std::max(fit.rate[0], fit.rate[1]);
    const bool ok = expect == 0.0
                        ? fit.no_growth
                        : std::abs(fitted - expect) <= rtol * expect;
    report["expect"] = {{"rate", expect}, {"rtol", rtol}, {"pass", ok}};
    if (!ok) code = kExitComputation;
  }

  if (as_json) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::printf("status: %s (t = %.6g, %zu samples)\n",
                report["status"].get<std::string>().c_str(), traj.last_time,
                traj.samples.size());
    if (have_fit) {
      std::printf("fitted rate: [%.6g, %.6g], analytic %.6g%s\n", fit.rate[0],
                  fit.rate[1], fit.analytic_rate,
                  fit.no_growth ? " (no growth)" : "");
    }
    if (!traj.message.empty()) std::printf("note: %s\n", traj.message.c_str());
    std::printf("artifacts in %s\n", out_dir.string().c_str());
  }
  return code;
}

int cmd_validate(std::size_t samples, unsigned seed, bool as_json) {
  const auto suites = dnls::run_all_suites(samples, seed);
  bool all_pass = true;
  json out = json::array();
  for (const auto& s : suites) {
    all_pass = all_pass && s.pass;
    out.push_back({{"suite", s.name},
                   {"pass", s.pass},
                   {"value", s.worst},
                   {"tolerance", s.tolerance},
                   {"detail", s.detail}});
  }
  if (as_json) {
    std::cout << json{{"pass", all_pass}, {"suites", out}}.dump(2) << '\n';
  } else {
    for (const auto& s : suites)
      std::printf("%-20s %s  (value %.3g, tol %.3g)\n", s.name.c_str(),
                  s.pass ? "PASS" : "FAIL", s.worst, s.tolerance);
  }
  return all_pass ? kExitOk : kExitComputation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-component lattice condensate stability toolkit"};
  app.require_subcommand(1);

  // spectrum
  auto* sp = app.add_subcommand("spectrum",
                                "Evaluate the excitation spectrum at (k, q)");
  ModelFlags sp_model;
  WaveFlags sp_wave;
  double sp_psi0sq = dnls::preset_psi0_sq();
  bool sp_json = false;
  sp_model.attach(sp);
  sp_wave.attach(sp);
  sp->add_option("--psi0sq", sp_psi0sq, "Carrier density psi0^2 per species");
  sp->add_flag("--json", sp_json, "JSON output");

  // phase-diagram
  auto* pd = app.add_subcommand("phase-diagram",
                                "Scan the (q, k) plane and export CSV");
  ModelFlags pd_model;
  double pd_psi0sq = dnls::preset_psi0_sq();
  std::size_t pd_ksteps = 400, pd_qsteps = 400;
  std::string pd_preset, pd_out = "grid.csv";
  unsigned pd_workers = 1;
  bool pd_strict = false, pd_json = false;
  pd_model.attach(pd);
  pd->add_option("--psi0sq", pd_psi0sq, "Carrier density psi0^2 per species");
  pd->add_option("--k-steps", pd_ksteps, "Grid steps along k");
  pd->add_option("--q-steps", pd_qsteps, "Grid steps along q");
  pd->add_option("--preset", pd_preset, "fig1a or fig1b parameter bundle");
  pd->add_option("--out", pd_out, "Output CSV path");
  pd->add_option("--workers", pd_workers, "Parallel workers");
  pd->add_flag("--strict", pd_strict, "Exit nonzero on any failed cell");
  pd->add_flag("--json", pd_json, "JSON summary");

  // simulate / growth-rate
  auto* sim = app.add_subcommand("simulate", "Time-evolve a modulated state");
  auto* gr = app.add_subcommand("growth-rate",
                                "Simulate and fit the sideband growth rate");
  std::string sim_preset, sim_config, sim_out = "run";
  bool sim_json = false;
  std::string gr_preset, gr_config, gr_out = "run";
  double gr_expect = -1.0, gr_rtol = 0.05;
  bool gr_json = false;
  for (auto* cmd : {sim, gr}) {
    auto& preset = cmd == sim ? sim_preset : gr_preset;
    auto& config = cmd == sim ? sim_config : gr_config;
    auto& out = cmd == sim ? sim_out : gr_out;
    cmd->add_option("--preset", preset,
                    "fig2a|fig2b|fig2c|fig3a|fig3b parameter bundle");
    cmd->add_option("--config", config, "JSON run configuration file");
    cmd->add_option("--out", out, "Output directory");
  }
  sim->add_flag("--json", sim_json, "JSON report");
  gr->add_option("--expect", gr_expect, "Expected growth rate (0 = no growth)");
  gr->add_option("--rtol", gr_rtol, "Relative tolerance for --expect");
  gr->add_flag("--json", gr_json, "JSON report");

  // validate
  auto* val = app.add_subcommand("validate", "Run the self-check suites");
  std::size_t val_samples = 1000;
  unsigned val_seed = 42;
  bool val_json = false;
  val->add_option("--samples", val_samples, "Oracle-equivalence sample count");
  val->add_option("--seed", val_seed, "Random seed");
  val->add_flag("--json", val_json, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sp->parsed())
      return cmd_spectrum(sp_model, sp_wave, sp_psi0sq, sp_json);
    if (pd->parsed())
      return cmd_phase_diagram(pd_model, pd_psi0sq, pd_ksteps, pd_qsteps,
                               pd_preset, pd_out, pd_workers, pd_strict,
                               pd_json);
    if (sim->parsed())
      return run_dynamics(sim_preset, sim_config, sim_out, false, 0.0, 0.0,
                          sim_json);
    if (gr->parsed())
      return run_dynamics(gr_preset, gr_config, gr_out, gr_expect >= 0.0,
                          gr_expect, gr_rtol, gr_json);
    if (val->parsed()) return cmd_validate(val_samples, val_seed, val_json);
  } catch (const dnls::divergence_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const dnls::model_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitUsage;
}
