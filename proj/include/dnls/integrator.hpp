#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dnls/model.hpp"

// Fixed-step classical RK4 time evolution of the coupled DNLS, with
// norm/energy drift guards and divergence detection.

namespace dnls {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 50.0;
  std::size_t observe_every = 10;   // steps between trajectory samples
  double norm_drift_tol = 1e-6;     // relative, abort above
  double energy_drift_tol = 1e-6;   // relative, abort above
  std::size_t density_every = 0;    // samples between density snapshots, 0=off

  void validate() const {
    if (!(dt > 0.0)) throw model_error("IntegratorConfig: dt must be positive");
    if (!(t_end > 0.0))
      throw model_error("IntegratorConfig: t_end must be positive");
    if (observe_every < 1)
      throw model_error("IntegratorConfig: observe_every must be >= 1");
    if (!(norm_drift_tol > 0.0) || !(energy_drift_tol > 0.0))
      throw model_error("IntegratorConfig: drift tolerances must be positive");
  }
};

enum class RunStatus { Completed, Diverged, DriftExceeded };

struct TrajectorySample {
  double t = 0.0;
  double norm1 = 0.0;
  double norm2 = 0.0;
  double hamiltonian = 0.0;
  double max_density1 = 0.0;
  double max_density2 = 0.0;
  // Filled by the caller's sample hook (e.g. sideband projections).
  std::array<cplx, 2> carrier{};
  std::array<cplx, 2> side_plus{};
  std::array<cplx, 2> side_minus{};
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<double> density_times;
  std::vector<std::vector<double>> density1;  // one row per snapshot
  std::vector<std::vector<double>> density2;
  RunStatus status = RunStatus::Completed;
  double last_time = 0.0;  // last finite, in-tolerance sample time
  std::string message;
  LatticeState final_state;
};

namespace detail {

struct Rk4Workspace {
  std::vector<cplx> k1, k2, k3, k4;
  LatticeState stage;
  explicit Rk4Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n) {}
};

// One RK4 step, no finiteness check. `state` is updated in place.
inline void rk4_step(LatticeState& state, const ModelParams& params,
                     double dt, Rk4Workspace& ws) {
  const std::size_t n = state.amps.size();
  if (ws.stage.sites != state.sites) ws.stage = state;
  LatticeState& stage = ws.stage;

  dnls_rhs(state, params, ws.k1);
  for (std::size_t i = 0; i < n; ++i)
    stage.amps[i] = state.amps[i] + 0.5 * dt * ws.k1[i];
  dnls_rhs(stage, params, ws.k2);
  for (std::size_t i = 0; i < n; ++i)
    stage.amps[i] = state.amps[i] + 0.5 * dt * ws.k2[i];
  dnls_rhs(stage, params, ws.k3);
  for (std::size_t i = 0; i < n; ++i)
    stage.amps[i] = state.amps[i] + dt * ws.k3[i];
  dnls_rhs(stage, params, ws.k4);

  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i)
    state.amps[i] +=
        w * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
  state.t += dt;
}

}  // namespace detail

// Single classical RK4 step. Throws divergence_error if the result is
// non-finite.
inline LatticeState step_rk4(const LatticeState& state,
                             const ModelParams& params, double dt) {
  LatticeState next = state;
  detail::Rk4Workspace ws(state.amps.size());
  detail::rk4_step(next, params, dt, ws);
  if (!next.finite())
    throw divergence_error("step_rk4: state diverged at t = " +
                           std::to_string(state.t));
  return next;
}

using SampleHook =
    std::function<void(const LatticeState&, TrajectorySample&)>;

// Evolve to t_end, sampling every observe_every steps. The run stops
// with a flagged status if the state goes non-finite or the norm/energy
// drift exceeds tolerance; the trajectory keeps the samples recorded up
// to the last good time.
inline Trajectory evolve(LatticeState state, const ModelParams& params,
                         const IntegratorConfig& config,
                         const SampleHook& hook = {}) {
  params.validate();
  config.validate();
  if (!state.finite())
    throw divergence_error("evolve: initial state is non-finite");

  Trajectory traj;
  const ConservedQuantities c0 = conserved_quantities(state, params);

  const auto record = [&](const LatticeState& s) -> bool {
    if (!s.finite()) {
      traj.status = RunStatus::Diverged;
      traj.message = "state diverged near t = " + std::to_string(s.t);
      return false;
    }
    TrajectorySample smp;
    smp.t = s.t;
    const ConservedQuantities c = conserved_quantities(s, params);
    smp.norm1 = c.norm1;
    smp.norm2 = c.norm2;
    smp.hamiltonian = c.hamiltonian;
    for (int sp = 1; sp <= 2; ++sp) {
      double mx = 0.0;
      for (const cplx& a : s.species(sp)) mx = std::max(mx, std::norm(a));
      (sp == 1 ? smp.max_density1 : smp.max_density2) = mx;
    }
    if (hook) hook(s, smp);

    const double n1_drift =
        c0.norm1 != 0.0 ? std::abs(c.norm1 - c0.norm1) / c0.norm1 : 0.0;
    const double n2_drift =
        c0.norm2 != 0.0 ? std::abs(c.norm2 - c0.norm2) / c0.norm2 : 0.0;
    const double h_drift = c0.hamiltonian != 0.0
                               ? std::abs(c.hamiltonian - c0.hamiltonian) /
                                     std::abs(c0.hamiltonian)
                               : std::abs(c.hamiltonian);
    if (std::max(n1_drift, n2_drift) > config.norm_drift_tol) {
      traj.status = RunStatus::DriftExceeded;
      traj.message = "norm drift exceeded tolerance at t = " +
                     std::to_string(s.t);
      return false;
    }
    if (h_drift > config.energy_drift_tol) {
      traj.status = RunStatus::DriftExceeded;
      traj.message = "energy drift exceeded tolerance at t = " +
                     std::to_string(s.t);
      return false;
    }

    traj.samples.push_back(smp);
    traj.last_time = s.t;
    if (config.density_every > 0 &&
        (traj.samples.size() - 1) % config.density_every == 0) {
      traj.density_times.push_back(s.t);
      for (int sp = 1; sp <= 2; ++sp) {
        std::vector<double> row;
        row.reserve(s.sites);
        for (const cplx& a : s.species(sp)) row.push_back(std::norm(a));
        (sp == 1 ? traj.density1 : traj.density2).push_back(std::move(row));
      }
    }
    return true;
  };

  const auto n_steps =
      static_cast<std::size_t>(std::llround(config.t_end / config.dt));
  detail::Rk4Workspace ws(state.amps.size());

  if (!record(state)) {
    traj.final_state = std::move(state);
    return traj;
  }
  for (std::size_t step = 1; step <= n_steps; ++step) {
    try {
      detail::rk4_step(state, params, config.dt, ws);
    } catch (const divergence_error&) {
      traj.status = RunStatus::Diverged;
      traj.message = "state diverged near t = " + std::to_string(state.t);
      break;
    }
    if (step % config.observe_every == 0 || step == n_steps) {
      if (!record(state)) break;
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

struct DriftReport {
  double norm1 = 0.0;   // max relative drift, species 1
  double norm2 = 0.0;   // max relative drift, species 2
  double energy = 0.0;  // max relative Hamiltonian drift
};

inline DriftReport drift_report(const Trajectory& traj) {
  if (traj.samples.empty())
    throw model_error("drift_report: empty trajectory");
  const TrajectorySample& s0 = traj.samples.front();
  DriftReport r;
  for (const auto& s : traj.samples) {
    if (s0.norm1 != 0.0)
      r.norm1 = std::max(r.norm1, std::abs(s.norm1 - s0.norm1) / s0.norm1);
    if (s0.norm2 != 0.0)
      r.norm2 = std::max(r.norm2, std::abs(s.norm2 - s0.norm2) / s0.norm2);
    if (s0.hamiltonian != 0.0)
      r.energy = std::max(r.energy,
                          std::abs(s.hamiltonian - s0.hamiltonian) /
                              std::abs(s0.hamiltonian));
  }
  return r;
}

namespace detail {

inline void json_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace detail

// JSON-lines trajectory export, one record per sample.
inline void write_jsonl(const Trajectory& traj,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw model_error("write_jsonl: cannot open " + path.string());
  std::string line;
  for (const auto& s : traj.samples) {
    line.clear();
    line += "{\"t\":";
    detail::json_num(line, s.t);
    line += ",\"norm1\":";
    detail::json_num(line, s.norm1);
    line += ",\"norm2\":";
    detail::json_num(line, s.norm2);
    line += ",\"H\":";
    detail::json_num(line, s.hamiltonian);
    line += ",\"max_density1\":";
    detail::json_num(line, s.max_density1);
    line += ",\"max_density2\":";
    detail::json_num(line, s.max_density2);
    line += ",\"sideband\":{";
    for (int sp = 0; sp < 2; ++sp) {
      line += sp == 0 ? "\"s1\":{" : ",\"s2\":{";
      line += "\"plus\":[";
      detail::json_num(line, s.side_plus[sp].real());
      line += ',';
      detail::json_num(line, s.side_plus[sp].imag());
      line += "],\"minus\":[";
      detail::json_num(line, s.side_minus[sp].real());
      line += ',';
      detail::json_num(line, s.side_minus[sp].imag());
      line += "],\"carrier\":[";
      detail::json_num(line, s.carrier[sp].real());
      line += ',';
      detail::json_num(line, s.carrier[sp].imag());
      line += "]}";
    }
    line += "}}\n";
    out << line;
  }
  if (!out) throw model_error("write_jsonl: write failed for " + path.string());
}

// Density snapshots as a CSV matrix: first column t, then one column
// per site.
inline void write_density_csv(const Trajectory& traj, int species,
                              const std::filesystem::path& path) {
  const auto& rows = species == 1 ? traj.density1 : traj.density2;
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw model_error("write_density_csv: cannot open " + path.string());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", traj.density_times[i]);
    out << buf;
    for (double d : rows[i]) {
      std::snprintf(buf, sizeof(buf), ",%.9g", d);
      out << buf;
    }
    out << '\n';
  }
  if (!out)
    throw model_error("write_density_csv: write failed for " + path.string());
}

}  // namespace dnls
