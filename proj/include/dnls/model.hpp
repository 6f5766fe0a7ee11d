#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

// Two-component discrete nonlinear Schroedinger model on a periodic
// lattice: parameter/state types, the equation right-hand side, and
// conserved-quantity diagnostics.

namespace dnls {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

class model_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class divergence_error : public model_error {
 public:
  using model_error::model_error;
};

struct ModelParams {
  double K1 = 1.0;
  double K2 = 1.0;
  double Lambda11 = 100.0;
  double Lambda22 = 100.298;
  double Lambda12 = 99.3;

  double hopping(int species) const { return species == 1 ? K1 : K2; }
  double intra(int species) const { return species == 1 ? Lambda11 : Lambda22; }

  // Lambda12^2 < Lambda11*Lambda22, the mixed-ground-state condition.
  bool miscible() const { return Lambda12 * Lambda12 < Lambda11 * Lambda22; }

  bool equal_hopping() const { return K1 == K2; }

  bool attractive() const {
    return Lambda11 < 0.0 || Lambda22 < 0.0 || Lambda12 < 0.0;
  }

  void validate() const {
    if (!(K1 > 0.0) || !(K2 > 0.0))
      throw model_error("ModelParams: hopping energies must be positive");
    if (!std::isfinite(Lambda11) || !std::isfinite(Lambda22) ||
        !std::isfinite(Lambda12))
      throw model_error("ModelParams: interaction strengths must be finite");
  }
};

struct LatticeConfig {
  std::size_t sites = 400;

  void validate() const {
    if (sites < 4)
      throw model_error("LatticeConfig: need at least 4 sites");
  }

  // Admissible wave number k = 2*pi*l/M for integer index l.
  double wave_number(long index) const {
    return two_pi * static_cast<double>(index) / static_cast<double>(sites);
  }
};

// Value type: time stamp plus the 2 x M complex amplitudes, species-major.
struct LatticeState {
  double t = 0.0;
  std::size_t sites = 0;
  std::vector<cplx> amps;  // size 2*sites, species 1 first

  LatticeState() = default;
  explicit LatticeState(std::size_t M, double time = 0.0)
      : t(time), sites(M), amps(2 * M, cplx{0.0, 0.0}) {}

  cplx& at(int species, std::size_t j) {
    return amps[static_cast<std::size_t>(species - 1) * sites + j];
  }
  const cplx& at(int species, std::size_t j) const {
    return amps[static_cast<std::size_t>(species - 1) * sites + j];
  }

  std::span<cplx> species(int s) {
    return {amps.data() + static_cast<std::size_t>(s - 1) * sites, sites};
  }
  std::span<const cplx> species(int s) const {
    return {amps.data() + static_cast<std::size_t>(s - 1) * sites, sites};
  }

  bool finite() const {
    for (const cplx& a : amps)
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    return true;
  }

  double norm(int species_index) const {
    double n = 0.0;
    for (const cplx& a : species(species_index)) n += std::norm(a);
    return n;
  }
};

struct ConservedQuantities {
  double norm1 = 0.0;
  double norm2 = 0.0;
  double total_norm = 0.0;
  double hamiltonian = 0.0;
};

// d psi_{j,s}/dt = i [ K_s (psi_{j-1,s} + psi_{j+1,s})
//                      - (L_ss |psi_{j,s}|^2 + L_ss' |psi_{j,s'}|^2) psi_{j,s} ]
// with periodic neighbors. Writes into `out` (size 2*M, species-major).
inline void dnls_rhs(const LatticeState& state, const ModelParams& params,
                     std::span<cplx> out) {
  const std::size_t M = state.sites;
  if (out.size() != 2 * M)
    throw model_error("dnls_rhs: output span has wrong size");
  if (!state.finite())
    throw divergence_error("dnls_rhs: non-finite state amplitudes");

  const double K[2] = {params.K1, params.K2};
  const double Lself[2] = {params.Lambda11, params.Lambda22};
  const double Lcross = params.Lambda12;

  const cplx* a1 = state.amps.data();
  const cplx* a2 = state.amps.data() + M;
  for (int s = 0; s < 2; ++s) {
    const cplx* self = (s == 0) ? a1 : a2;
    const cplx* other = (s == 0) ? a2 : a1;
    cplx* dst = out.data() + static_cast<std::size_t>(s) * M;
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t jm = (j == 0) ? M - 1 : j - 1;
      const std::size_t jp = (j + 1 == M) ? 0 : j + 1;
      const cplx hop = self[jm] + self[jp];
      const double dens = Lself[s] * std::norm(self[j]) + Lcross * std::norm(other[j]);
      const cplx v = K[s] * hop - dens * self[j];
      dst[j] = cplx{-v.imag(), v.real()};  // multiply by i
    }
  }
}

inline std::vector<cplx> dnls_rhs(const LatticeState& state,
                                  const ModelParams& params) {
  std::vector<cplx> out(2 * state.sites);
  dnls_rhs(state, params, out);
  return out;
}

// H = sum_j { sum_s [ -K_s (psi*_j psi_{j+1} + c.c.) + (L_ss/2)|psi_j|^4 ]
//             + L_12 |psi_{j,1}|^2 |psi_{j,2}|^2 }
// chosen so that i dpsi/dt = dH/dpsi* reproduces dnls_rhs.
inline ConservedQuantities conserved_quantities(const LatticeState& state,
                                                const ModelParams& params) {
  if (!state.finite())
    throw divergence_error("conserved_quantities: non-finite state");
  const std::size_t M = state.sites;
  ConservedQuantities out;
  double H = 0.0;
  for (int s = 1; s <= 2; ++s) {
    const auto a = state.species(s);
    const double K = params.hopping(s);
    const double L = params.intra(s);
    double n = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t jp = (j + 1 == M) ? 0 : j + 1;
      H += -2.0 * K * (std::conj(a[j]) * a[jp]).real();
      const double d = std::norm(a[j]);
      H += 0.5 * L * d * d;
      n += d;
    }
    (s == 1 ? out.norm1 : out.norm2) = n;
  }
  const auto a1 = state.species(1);
  const auto a2 = state.species(2);
  for (std::size_t j = 0; j < M; ++j)
    H += params.Lambda12 * std::norm(a1[j]) * std::norm(a2[j]);
  out.total_norm = out.norm1 + out.norm2;
  out.hamiltonian = H;
  return out;
}

struct RegimeReport {
  bool pass = false;
  double ratio = 0.0;      // min_s (N/M) K_s / max |Lambda|
  double threshold = 10.0; // ">>" cutoff
};

// Checks (N/M) K_s >> Lambda for the mean-field (superfluid) regime.
inline RegimeReport superfluid_regime_check(const ModelParams& params,
                                            double atom_number,
                                            std::size_t sites,
                                            double threshold = 10.0) {
  params.validate();
  if (!(atom_number > 0.0))
    throw model_error("superfluid_regime_check: atom number must be positive");
  if (sites < 1)
    throw model_error("superfluid_regime_check: need at least one site");
  const double filling = atom_number / static_cast<double>(sites);
  const double kin = filling * std::min(params.K1, params.K2);
  const double lam = std::max({std::abs(params.Lambda11),
                               std::abs(params.Lambda22),
                               std::abs(params.Lambda12)});
  RegimeReport r;
  r.threshold = threshold;
  r.ratio = lam > 0.0 ? kin / lam : std::numeric_limits<double>::infinity();
  r.pass = r.ratio >= threshold;
  return r;
}

}  // namespace dnls
