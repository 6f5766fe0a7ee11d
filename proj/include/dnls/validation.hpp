#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dnls/bogoliubov.hpp"
#include "dnls/experiments.hpp"
#include "dnls/integrator.hpp"
#include "dnls/model.hpp"

// Self-check suites: closed form vs 4x4 matrix eigenvalues, the
// long-wavelength limit, RK4 convergence order, and conservation on the
// exact carrier. Used by the CLI `validate` subcommand and the
// acceptance tests.

namespace dnls {

struct SuiteResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // worst observed error / fitted value
  double tolerance = 0.0;
  std::string detail;
};

// Pairs the four matrix eigenvalues with the four closed-form branches
// by minimum total distance over all permutations; returns the largest
// pair distance.
inline double match_eigenvalues(const std::array<cplx, 4>& got,
                                const std::array<cplx, 4>& want) {
  double best = std::numeric_limits<double>::infinity();
  std::array<int, 4> idx{0, 1, 2, 3};
  do {
    double worst_pair = 0.0;
    for (int i = 0; i < 4; ++i)
      worst_pair = std::max(
          worst_pair, std::abs(got[static_cast<std::size_t>(idx[i])] -
                               want[static_cast<std::size_t>(i)]));
    best = std::min(best, worst_pair);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

// Randomized equivalence of the matrix path and Eq.-(3)-style closed
// form, K1 == K2.
inline SuiteResult oracle_equivalence_suite(std::size_t samples = 1000,
                                            unsigned seed = 42,
                                            double rel_tol = 1e-9) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uk(1e-3, 2.0);
  std::uniform_real_distribution<double> ulam(0.0, 200.0);
  std::uniform_real_distribution<double> upsq(1e-6, 0.01);
  std::uniform_real_distribution<double> uang(0.0, two_pi);

  SuiteResult res{"oracle_equivalence", true, 0.0, rel_tol, ""};
  for (std::size_t i = 0; i < samples; ++i) {
    ModelParams params;
    params.K1 = params.K2 = uk(rng);
    params.Lambda11 = ulam(rng);
    params.Lambda22 = ulam(rng);
    params.Lambda12 = ulam(rng);
    const double p1 = std::sqrt(upsq(rng));
    const double p2 = std::sqrt(upsq(rng));
    const double k = uang(rng);
    const double q = uang(rng);

    const CarrierSpec carrier = make_carrier(params, k, p1, p2);
    const SpectrumResult closed = spectrum(params, carrier, q);
    const BogoliubovModes modes = bogoliubov_matrix(params, carrier, q);

    double scale = 1.0;
    for (const cplx& w : closed.omega) scale = std::max(scale, std::abs(w));
    const double err =
        match_eigenvalues(modes.eigenvalues, closed.omega) / scale;
    res.worst = std::max(res.worst, err);
  }
  res.pass = res.worst <= rel_tol;
  res.detail = "max relative eigenvalue mismatch over " +
               std::to_string(samples) + " samples";
  return res;
}

// Eq.-(3) vs long-wavelength form at k = q = 1e-3 for both paper
// parameter sets.
inline SuiteResult long_wavelength_suite(double rel_tol = 1e-4) {
  SuiteResult res{"long_wavelength", true, 0.0, rel_tol, ""};
  const double kq = 1e-3;
  for (const ModelParams& params : {miscible_params(), immiscible_params()}) {
    const CarrierSpec carrier =
        make_carrier_equal(params, kq, preset_psi0_sq());
    const SpectrumResult full = spectrum(params, carrier, kq);
    const SpectrumResult lw = spectrum_long_wavelength(params, carrier, kq);
    for (int i = 0; i < 4; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double denom = std::abs(full.omega[idx]);
      if (denom == 0.0) continue;
      res.worst = std::max(
          res.worst, std::abs(full.omega[idx] - lw.omega[idx]) / denom);
    }
  }
  res.pass = res.worst <= rel_tol;
  res.detail = "max relative branch difference at k = q = 1e-3";
  return res;
}

// Exact carrier evolution for order fitting: psi(t) = psi0 e^{i(kj - mu t)}.
inline LatticeState exact_carrier_state(const CarrierSpec& carrier,
                                        std::size_t sites, double t) {
  LatticeState state(sites, t);
  for (std::size_t j = 0; j < sites; ++j) {
    const double jd = static_cast<double>(j);
    state.at(1, j) =
        carrier.psi0_1 * std::polar(1.0, carrier.k * jd - carrier.mu1 * t);
    state.at(2, j) =
        carrier.psi0_2 * std::polar(1.0, carrier.k * jd - carrier.mu2 * t);
  }
  return state;
}

inline double carrier_global_error(const ModelParams& params,
                                   const CarrierSpec& carrier,
                                   std::size_t sites, double t_end,
                                   double dt) {
  LatticeState state = exact_carrier_state(carrier, sites, 0.0);
  detail::Rk4Workspace ws(state.amps.size());
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
  for (std::size_t i = 0; i < n; ++i)
    detail::rk4_step(state, params, dt, ws);
  const LatticeState exact = exact_carrier_state(carrier, sites, state.t);
  double err = 0.0;
  for (std::size_t i = 0; i < state.amps.size(); ++i)
    err = std::max(err, std::abs(state.amps[i] - exact.amps[i]));
  return err;
}

// Global-error convergence exponent on the exactly solvable carrier
// across dt in {2e-3, 1e-3, 5e-4}; expected 4.0 +- 0.2.
inline SuiteResult convergence_order_suite(double expected = 4.0,
                                           double tol = 0.2) {
  // Strong nonlinearity so the truncation error sits well above
  // round-off at these step sizes. k = 2 pi 6/32 keeps the carrier
  // periodic on the 32-site lattice.
  ModelParams params{1.0, 1.0, 5.0, 5.0, 2.0};
  const std::size_t sites = 32;
  const CarrierSpec carrier = make_carrier(
      params, two_pi * 6.0 / static_cast<double>(sites), 1.0, 1.0);
  const double t_end = 2.0;
  const std::array<double, 3> dts{2e-3, 1e-3, 5e-4};

  std::array<double, 3> errs{};
  for (std::size_t i = 0; i < dts.size(); ++i)
    errs[i] = carrier_global_error(params, carrier, sites, t_end, dts[i]);

  // least-squares slope of log(err) vs log(dt)
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double x = std::log(dts[i]);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);

  SuiteResult res{"convergence_order", std::abs(slope - expected) <= tol,
                  slope, tol, "fitted global-error exponent on the carrier"};
  return res;
}

// Norm and Hamiltonian drift on a carrier run at the default step.
inline SuiteResult conservation_suite(double t_end = 10.0,
                                      double drift_tol = 1e-8) {
  const ModelParams params = miscible_params();
  const CarrierSpec carrier = make_carrier_equal(
      params, 3.0 * std::numbers::pi / 4.0, preset_psi0_sq());
  LatticeState state = exact_carrier_state(carrier, preset_sites, 0.0);
  IntegratorConfig config;
  config.dt = 1e-3;
  config.t_end = t_end;
  config.observe_every = 100;
  const Trajectory traj = evolve(std::move(state), params, config);
  SuiteResult res{"conservation", false, 0.0, drift_tol, ""};
  if (traj.status != RunStatus::Completed) {
    res.detail = "carrier run did not complete: " + traj.message;
    return res;
  }
  const DriftReport drift = drift_report(traj);
  res.worst = std::max({drift.norm1, drift.norm2, drift.energy});
  res.pass = res.worst <= drift_tol;
  res.detail = "max relative norm/energy drift on a carrier run";
  return res;
}

inline std::vector<SuiteResult> run_all_suites(std::size_t samples = 1000,
                                               unsigned seed = 42) {
  return {oracle_equivalence_suite(samples, seed), long_wavelength_suite(),
          convergence_order_suite(), conservation_suite()};
}

}  // namespace dnls
