#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "dnls/model.hpp"

// Linear stability of the plane-wave carrier: closed-form excitation
// spectrum, modulational-instability classification, long-wavelength
// limit, and the 4x4 linearization matrix used as a numeric oracle.

namespace dnls {

// Plane-wave carrier psi_{j,s} = psi0_s e^{i(k j - mu_s t)} with real
// nonnegative amplitudes.
struct CarrierSpec {
  double k = 0.0;
  double psi0_1 = 0.0;
  double psi0_2 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
};

// mu_s = -2 K_s cos(k) + L_ss psi0_s^2 + L_ss' psi0_s'^2
inline double chemical_potential(const ModelParams& params, double k,
                                 double psi0_1, double psi0_2, int species) {
  const double self = (species == 1) ? psi0_1 : psi0_2;
  const double other = (species == 1) ? psi0_2 : psi0_1;
  return -2.0 * params.hopping(species) * std::cos(k) +
         params.intra(species) * self * self +
         params.Lambda12 * other * other;
}

inline CarrierSpec make_carrier(const ModelParams& params, double k,
                                double psi0_1, double psi0_2) {
  if (psi0_1 < 0.0 || psi0_2 < 0.0)
    throw model_error("make_carrier: carrier amplitudes must be nonnegative");
  CarrierSpec c;
  c.k = k;
  c.psi0_1 = psi0_1;
  c.psi0_2 = psi0_2;
  c.mu1 = chemical_potential(params, k, psi0_1, psi0_2, 1);
  c.mu2 = chemical_potential(params, k, psi0_1, psi0_2, 2);
  return c;
}

// Equal-amplitude convenience: psi0_1 = psi0_2 = sqrt(psi0_sq).
inline CarrierSpec make_carrier_equal(const ModelParams& params, double k,
                                      double psi0_sq) {
  const double a = std::sqrt(psi0_sq);
  return make_carrier(params, k, a, a);
}

// Lattice kinetic factor; its sign flip with cos(k) is the discreteness
// effect behind instability of the miscible mixture.
inline double epsilon_q(double K, double k, double q) {
  const double s = std::sin(0.5 * q);
  return 4.0 * K * std::cos(k) * s * s;
}

// Delta_s = L1 p1^2 + L2 p2^2 + (-1)^s sqrt([L1 p1^2 - L2 p2^2]^2
//                                           + 4 L12^2 (p1 p2)^2)
// so Delta_1 <= Delta_2 always.
inline double delta_sigma(const ModelParams& params, double psi0_1,
                          double psi0_2, int species) {
  const double n1 = params.Lambda11 * psi0_1 * psi0_1;
  const double n2 = params.Lambda22 * psi0_2 * psi0_2;
  const double cross = params.Lambda12 * psi0_1 * psi0_2;
  const double root = std::sqrt((n1 - n2) * (n1 - n2) + 4.0 * cross * cross);
  return n1 + n2 + ((species == 1) ? -root : root);
}

// Equal-amplitude form Delta_s = Omega_s psi0^2 with
// Omega_s = L1 + L2 + (-1)^s sqrt((L1 - L2)^2 + 4 L12^2).
inline double omega_uniform(const ModelParams& params, int species) {
  const double d = params.Lambda11 - params.Lambda22;
  const double root =
      std::sqrt(d * d + 4.0 * params.Lambda12 * params.Lambda12);
  return params.Lambda11 + params.Lambda22 + ((species == 1) ? -root : root);
}

struct StabilityClass {
  enum class Kind { Stable, PartiallyUnstable, FullyUnstable, Failed };
  Kind kind = Kind::Stable;
  int unstable_component = 0;  // 1 or 2 when PartiallyUnstable

  static StabilityClass from_growth(double growth1, double growth2) {
    StabilityClass c;
    const bool u1 = growth1 > 0.0;
    const bool u2 = growth2 > 0.0;
    if (u1 && u2) {
      c.kind = Kind::FullyUnstable;
    } else if (u1 || u2) {
      c.kind = Kind::PartiallyUnstable;
      c.unstable_component = u1 ? 1 : 2;
    }
    return c;
  }

  bool stable() const { return kind == Kind::Stable; }

  std::string label() const {
    switch (kind) {
      case Kind::Stable: return "STABLE";
      case Kind::PartiallyUnstable:
        return unstable_component == 1 ? "UNSTABLE_1" : "UNSTABLE_2";
      case Kind::FullyUnstable: return "UNSTABLE_BOTH";
      case Kind::Failed: return "FAILED";
    }
    return "FAILED";
  }

  bool operator==(const StabilityClass& o) const {
    return kind == o.kind && (kind != Kind::PartiallyUnstable ||
                              unstable_component == o.unstable_component);
  }
};

struct SpectrumResult {
  double q = 0.0;
  double epsilon = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  // Branch order: omega[0]=w-_{q,1}, omega[1]=w+_{q,1},
  //               omega[2]=w-_{q,2}, omega[3]=w+_{q,2}.
  std::array<cplx, 4> omega{};
  double growth1 = 0.0;
  double growth2 = 0.0;

  double growth(int species) const { return species == 1 ? growth1 : growth2; }
};

namespace detail {

// w+- = doppler +- sqrt(radicand); a negative radicand yields the
// conjugate pair doppler +- i sqrt(|radicand|).
inline void fill_branches(double doppler, double radicand, cplx& minus,
                          cplx& plus, double& growth) {
  if (radicand >= 0.0) {
    const double r = std::sqrt(radicand);
    minus = cplx{doppler - r, 0.0};
    plus = cplx{doppler + r, 0.0};
    growth = 0.0;
  } else {
    const double r = std::sqrt(-radicand);
    minus = cplx{doppler, -r};
    plus = cplx{doppler, r};
    growth = r;
  }
}

inline void require_equal_hopping(const ModelParams& params,
                                  const char* where) {
  if (!params.equal_hopping())
    throw model_error(std::string(where) +
                      ": closed form requires K1 == K2; use "
                      "bogoliubov_matrix for unequal hopping");
}

}  // namespace detail

// Closed-form spectrum w+-_{q,s} = 2K sin(k) sin(q) +- sqrt(eps_q (eps_q
// + Delta_s)). Valid for K1 == K2 only.
inline SpectrumResult spectrum(const ModelParams& params,
                               const CarrierSpec& carrier, double q) {
  detail::require_equal_hopping(params, "spectrum");
  const double K = params.K1;
  SpectrumResult r;
  r.q = q;
  r.epsilon = epsilon_q(K, carrier.k, q);
  r.delta1 = delta_sigma(params, carrier.psi0_1, carrier.psi0_2, 1);
  r.delta2 = delta_sigma(params, carrier.psi0_1, carrier.psi0_2, 2);
  const double doppler = 2.0 * K * std::sin(carrier.k) * std::sin(q);
  detail::fill_branches(doppler, r.epsilon * (r.epsilon + r.delta1),
                        r.omega[0], r.omega[1], r.growth1);
  detail::fill_branches(doppler, r.epsilon * (r.epsilon + r.delta2),
                        r.omega[2], r.omega[3], r.growth2);
  return r;
}

// k,q -> 0 limit: w+- = 2Kqk +- sqrt(K q^2 (K q^2 + Delta_s)); matches
// the homogeneous two-component result with K q^2 in place of q^2/2m.
inline SpectrumResult spectrum_long_wavelength(const ModelParams& params,
                                               const CarrierSpec& carrier,
                                               double q) {
  detail::require_equal_hopping(params, "spectrum_long_wavelength");
  const double K = params.K1;
  SpectrumResult r;
  r.q = q;
  r.epsilon = K * q * q;
  r.delta1 = delta_sigma(params, carrier.psi0_1, carrier.psi0_2, 1);
  r.delta2 = delta_sigma(params, carrier.psi0_1, carrier.psi0_2, 2);
  const double doppler = 2.0 * K * q * carrier.k;
  detail::fill_branches(doppler, r.epsilon * (r.epsilon + r.delta1),
                        r.omega[0], r.omega[1], r.growth1);
  detail::fill_branches(doppler, r.epsilon * (r.epsilon + r.delta2),
                        r.omega[2], r.omega[3], r.growth2);
  return r;
}

inline StabilityClass classify(const ModelParams& params,
                               const CarrierSpec& carrier, double q) {
  const SpectrumResult r = spectrum(params, carrier, q);
  return StabilityClass::from_growth(r.growth1, r.growth2);
}

// psi0_cr^2 = 4K / Omega_1 (miscible) or 4K / |Omega_1| (immiscible);
// above it the relevant instability holds for arbitrary q. Equal
// amplitudes and K1 == K2 assumed. Omega_1 == 0 -> +infinity.
inline double critical_amplitude(const ModelParams& params) {
  detail::require_equal_hopping(params, "critical_amplitude");
  const double omega1 = omega_uniform(params, 1);
  if (omega1 == 0.0) return std::numeric_limits<double>::infinity();
  return 4.0 * params.K1 / std::abs(omega1);
}

struct BogoliubovModes {
  Eigen::Matrix4d matrix;         // rows/cols ordered (u1, v1, u2, v2)
  std::array<cplx, 4> eigenvalues{};
  double max_growth = 0.0;        // max |Im w|
  double residual = 0.0;          // max ||M v - w v|| / ||v||
};

// Linearization of the DNLS around the carrier at perturbation wave
// number q. Valid for general K1, K2; the eigenvalues are the four
// excitation frequencies.
inline BogoliubovModes bogoliubov_matrix(const ModelParams& params,
                                         const CarrierSpec& carrier,
                                         double q) {
  const double k = carrier.k;
  const double p1 = carrier.psi0_1;
  const double p2 = carrier.psi0_2;
  const double B1 = params.Lambda11 * p1 * p1;
  const double B2 = params.Lambda22 * p2 * p2;
  const double C = params.Lambda12 * p1 * p2;
  const auto A = [&](double K, double B, double sign_q) {
    const double s = std::sin(0.5 * q);
    return sign_q * 2.0 * K * std::sin(k) * std::sin(q) +
           4.0 * K * std::cos(k) * s * s + B;
  };
  const double A1p = A(params.K1, B1, +1.0);
  const double A1m = A(params.K1, B1, -1.0);
  const double A2p = A(params.K2, B2, +1.0);
  const double A2m = A(params.K2, B2, -1.0);

  BogoliubovModes out;
  out.matrix << A1p, B1, C, C,
      -B1, -A1m, -C, -C,
      C, C, A2p, B2,
      -C, -C, -B2, -A2m;

  Eigen::EigenSolver<Eigen::Matrix4d> solver(out.matrix);
  if (solver.info() != Eigen::Success)
    throw model_error("bogoliubov_matrix: eigenvalue iteration failed");

  const auto evals = solver.eigenvalues();
  const auto evecs = solver.eigenvectors();
  const Eigen::Matrix4cd Mc = out.matrix.cast<cplx>();
  for (int i = 0; i < 4; ++i) {
    out.eigenvalues[static_cast<std::size_t>(i)] = evals(i);
    out.max_growth = std::max(out.max_growth, std::abs(evals(i).imag()));
    const Eigen::Vector4cd v = evecs.col(i);
    const double res = (Mc * v - evals(i) * v).norm() / v.norm();
    out.residual = std::max(out.residual, res);
  }
  return out;
}

}  // namespace dnls
