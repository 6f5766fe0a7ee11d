#include <doctest.h>

#include <numbers>
#include <random>

#include "dnls/bogoliubov.hpp"
#include "dnls/experiments.hpp"
#include "dnls/validation.hpp"

using namespace dnls;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("chemical potential") {
  SUBCASE("pure kinetic term at k = 0") {
    ModelParams params{2.0, 2.0, 0.0, 0.0, 0.0};
    CHECK(chemical_potential(params, 0.0, 0.1, 0.1, 1) ==
          doctest::Approx(-4.0));
  }
  SUBCASE("kinetic term vanishes at k = pi/2") {
    ModelParams params{1.0, 1.0, 3.0, 5.0, 2.0};
    const double mu1 = chemical_potential(params, pi / 2.0, 0.5, 0.25, 1);
    CHECK(mu1 == doctest::Approx(3.0 * 0.25 + 2.0 * 0.0625).epsilon(1e-12));
  }
  SUBCASE("paper miscible point, regression") {
    const ModelParams params = miscible_params();
    const double psq = 1.0 / (2.0 * 801.0);
    const double mu1 = chemical_potential(params, 3.0 * pi / 4.0,
                                          std::sqrt(psq), std::sqrt(psq), 1);
    // -2 cos(3 pi/4) + (100 + 99.3) / 1602
    CHECK(mu1 == doctest::Approx(1.5386205536340187).epsilon(1e-14));
  }
  SUBCASE("carrier spec stores matching potentials") {
    const ModelParams params = miscible_params();
    const CarrierSpec c = make_carrier(params, 0.7, 0.02, 0.03);
    CHECK(c.mu1 == chemical_potential(params, 0.7, 0.02, 0.03, 1));
    CHECK(c.mu2 == chemical_potential(params, 0.7, 0.02, 0.03, 2));
  }
}

TEST_CASE("epsilon_q") {
  CHECK(epsilon_q(1.0, 0.3, 0.0) == 0.0);
  CHECK(epsilon_q(1.0, pi, pi) == doctest::Approx(-4.0));
  CHECK(epsilon_q(1.0, 3.0 * pi / 4.0, pi / 4.0) ==
        doctest::Approx(-0.41421).epsilon(1e-4));
}

TEST_CASE("delta_sigma") {
  SUBCASE("decoupled limit gives min/max of the single-species values") {
    ModelParams params{1.0, 1.0, 3.0, 7.0, 0.0};
    const double p1 = 0.5, p2 = 0.3;
    const double v1 = 2.0 * 3.0 * p1 * p1;
    const double v2 = 2.0 * 7.0 * p2 * p2;
    CHECK(delta_sigma(params, p1, p2, 1) ==
          doctest::Approx(std::min(v1, v2)).epsilon(1e-14));
    CHECK(delta_sigma(params, p1, p2, 2) ==
          doctest::Approx(std::max(v1, v2)).epsilon(1e-14));
  }
  SUBCASE("miscible: both deltas positive") {
    const ModelParams params = miscible_params();
    CHECK(delta_sigma(params, 0.03, 0.04, 1) > 0.0);
    CHECK(delta_sigma(params, 0.03, 0.04, 2) > 0.0);
  }
  SUBCASE("immiscible: delta1 < 0 < delta2") {
    const ModelParams params = immiscible_params();
    CHECK(delta_sigma(params, 0.03, 0.04, 1) < 0.0);
    CHECK(delta_sigma(params, 0.03, 0.04, 2) > 0.0);
  }
}

TEST_CASE("delta ordering holds for random parameters") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ulam(-200.0, 200.0);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    ModelParams params{1.0, 1.0, ulam(rng), ulam(rng), ulam(rng)};
    const double p1 = up(rng), p2 = up(rng);
    CHECK(delta_sigma(params, p1, p2, 1) <=
          delta_sigma(params, p1, p2, 2) + 1e-12);
  }
}

TEST_CASE("omega_uniform") {
  SUBCASE("degenerate symmetric mixture") {
    ModelParams params{1.0, 1.0, 50.0, 50.0, 50.0};
    CHECK(omega_uniform(params, 1) == doctest::Approx(0.0));
    CHECK(omega_uniform(params, 2) == doctest::Approx(200.0));
  }
  SUBCASE("paper miscible set") {
    const ModelParams params = miscible_params();
    CHECK(omega_uniform(params, 1) ==
          doctest::Approx(1.6977764251006704).epsilon(1e-12));
    CHECK(omega_uniform(params, 2) ==
          doctest::Approx(398.89822357489936).epsilon(1e-12));
  }
  SUBCASE("paper immiscible set: |Omega1| << Omega2") {
    const ModelParams params = immiscible_params();
    const double o1 = omega_uniform(params, 1);
    const double o2 = omega_uniform(params, 2);
    CHECK(o1 == doctest::Approx(-0.09749934047124498).epsilon(1e-9));
    CHECK(o2 == doctest::Approx(388.4374993404713).epsilon(1e-12));
    CHECK(std::abs(o1) < 1e-3 * o2);
  }
  SUBCASE("equal-amplitude consistency with delta_sigma") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> ulam(0.0, 200.0);
    std::uniform_real_distribution<double> up(1e-3, 1.0);
    for (int i = 0; i < 200; ++i) {
      ModelParams params{1.0, 1.0, ulam(rng), ulam(rng), ulam(rng)};
      const double p = up(rng);
      for (int sp = 1; sp <= 2; ++sp)
        CHECK(delta_sigma(params, p, p, sp) ==
              doctest::Approx(omega_uniform(params, sp) * p * p)
                  .epsilon(1e-10));
    }
  }
}

TEST_CASE("spectrum reproduces the paper growth rates") {
  SUBCASE("miscible, k = 3pi/4, q = pi/4") {
    const ModelParams params = miscible_params();
    const CarrierSpec c =
        make_carrier_equal(params, 3.0 * pi / 4.0, 1.0 / 801.0);
    const SpectrumResult r = spectrum(params, c, pi / 4.0);
    CHECK(r.growth1 == 0.0);
    CHECK(r.growth2 == doctest::Approx(0.1863).epsilon(3e-3));
    CHECK(r.growth2 ==
          doctest::Approx(0.18629437571533627).epsilon(1e-12));
  }
  SUBCASE("immiscible, k = 3pi/4, q = pi/40 and pi/20") {
    const ModelParams params = immiscible_params();
    const CarrierSpec c =
        make_carrier_equal(params, 3.0 * pi / 4.0, 1.0 / 801.0);
    CHECK(spectrum(params, c, pi / 40.0).growth2 ==
          doctest::Approx(0.04577244589869676).epsilon(1e-12));
    CHECK(spectrum(params, c, pi / 20.0).growth2 ==
          doctest::Approx(0.09022362042212712).epsilon(1e-12));
    CHECK(spectrum(params, c, pi / 40.0).growth1 == 0.0);
    CHECK(spectrum(params, c, pi / 20.0).growth1 == 0.0);
  }
}

TEST_CASE("decoupled spectra equal the single-component result") {
  ModelParams params{1.2, 1.2, 40.0, 60.0, 0.0};
  const double p1 = 0.05, p2 = 0.07, k = 2.1, q = 0.8;
  const CarrierSpec c = make_carrier(params, k, p1, p2);
  const SpectrumResult r = spectrum(params, c, q);
  const double doppler = 2.0 * 1.2 * std::sin(k) * std::sin(q);
  const double eps = epsilon_q(1.2, k, q);
  // Delta-ordered: branch 1 carries the smaller single-species Delta.
  const double d_lo = std::min(2.0 * 40.0 * p1 * p1, 2.0 * 60.0 * p2 * p2);
  const double d_hi = std::max(2.0 * 40.0 * p1 * p1, 2.0 * 60.0 * p2 * p2);
  CHECK(r.delta1 == doctest::Approx(d_lo).epsilon(1e-12));
  CHECK(r.delta2 == doctest::Approx(d_hi).epsilon(1e-12));
  CHECK(r.omega[1].real() ==
        doctest::Approx(doppler + std::sqrt(eps * (eps + d_lo)))
            .epsilon(1e-12));
}

TEST_CASE("spectrum branch structure") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> ulam(0.0, 200.0);
  std::uniform_real_distribution<double> up(0.0, 0.1);
  std::uniform_real_distribution<double> uang(0.0, two_pi);
  for (int i = 0; i < 300; ++i) {
    ModelParams params{1.0, 1.0, ulam(rng), ulam(rng), ulam(rng)};
    const CarrierSpec c = make_carrier(params, uang(rng), up(rng), up(rng));
    const double q = uang(rng);
    const SpectrumResult r = spectrum(params, c, q);
    const double doppler = 2.0 * std::sin(c.k) * std::sin(q);

    // branch sum is twice the Doppler shift per species
    CHECK(std::abs(r.omega[0] + r.omega[1] - 2.0 * doppler) < 1e-10);
    CHECK(std::abs(r.omega[2] + r.omega[3] - 2.0 * doppler) < 1e-10);
    // reality dichotomy: imaginary part iff negative radicand
    CHECK((r.omega[0].imag() != 0.0) ==
          (r.epsilon * (r.epsilon + r.delta1) < 0.0));
    CHECK((r.omega[2].imag() != 0.0) ==
          (r.epsilon * (r.epsilon + r.delta2) < 0.0));
    // conjugate pair about the Doppler shift when unstable
    if (r.growth2 > 0.0) {
      CHECK(r.omega[2].real() == doctest::Approx(doppler));
      CHECK(std::abs(r.omega[2] - std::conj(r.omega[3])) < 1e-12);
    }
  }
}

TEST_CASE("spectrum requires equal hopping") {
  ModelParams params{1.0, 1.5, 10.0, 10.0, 5.0};
  const CarrierSpec c = make_carrier(params, 0.5, 0.1, 0.1);
  CHECK_THROWS_AS(spectrum(params, c, 0.3), model_error);
  CHECK_NOTHROW(bogoliubov_matrix(params, c, 0.3));
}

TEST_CASE("long-wavelength limit") {
  SUBCASE("miscible deltas are positive: no growth anywhere") {
    const ModelParams params = miscible_params();
    const CarrierSpec c = make_carrier_equal(params, 0.0, 1.0 / 801.0);
    for (double q : {0.01, 0.1, 1.0, 3.0}) {
      const SpectrumResult r = spectrum_long_wavelength(params, c, q);
      CHECK(r.growth1 == 0.0);
      CHECK(r.growth2 == 0.0);
    }
  }
  SUBCASE("q = 0 gives zero branches") {
    const ModelParams params = miscible_params();
    const CarrierSpec c = make_carrier_equal(params, 0.2, 1.0 / 801.0);
    const SpectrumResult r = spectrum_long_wavelength(params, c, 0.0);
    for (const cplx& w : r.omega) CHECK(std::abs(w) == 0.0);
  }
  SUBCASE("agreement with the full form at k = q = 1e-3") {
    const SuiteResult res = long_wavelength_suite();
    CHECK(res.pass);
    CHECK(res.worst <= 1e-4);
  }
}

TEST_CASE("classification of the labeled paper points") {
  const ModelParams params = miscible_params();
  const double psq = 1.0 / 801.0;
  SUBCASE("point 1: k = pi/4, q = pi/2 is stable") {
    const auto cls =
        classify(params, make_carrier_equal(params, pi / 4.0, psq), pi / 2.0);
    CHECK(cls.kind == StabilityClass::Kind::Stable);
  }
  SUBCASE("point 2: k = 3pi/4, q = pi/2 is stable") {
    const auto cls = classify(
        params, make_carrier_equal(params, 3.0 * pi / 4.0, psq), pi / 2.0);
    CHECK(cls.kind == StabilityClass::Kind::Stable);
  }
  SUBCASE("point 3: k = 3pi/4, q = pi/4 is partially unstable in branch 2") {
    const CarrierSpec c = make_carrier_equal(params, 3.0 * pi / 4.0, psq);
    const auto cls = classify(params, c, pi / 4.0);
    CHECK(cls.kind == StabilityClass::Kind::PartiallyUnstable);
    CHECK(cls.unstable_component == 2);
    const SpectrumResult r = spectrum(params, c, pi / 4.0);
    CHECK(r.omega[0].imag() == 0.0);  // branch 1 real
    CHECK(r.omega[2].imag() != 0.0);  // branch 2 imaginary
  }
}

TEST_CASE("miscible carriers with cos k > 0 are stable for all q") {
  const ModelParams params = miscible_params();
  for (int ik = 0; ik < 50; ++ik) {
    const double k = -pi / 2.0 + pi * (ik + 0.5) / 50.0;  // cos k > 0
    const CarrierSpec c = make_carrier_equal(params, k, 1.0 / 801.0);
    for (int iq = 0; iq < 100; ++iq) {
      const double q = two_pi * iq / 100.0;
      CHECK(classify(params, c, q).stable());
    }
  }
}

TEST_CASE("critical amplitude") {
  SUBCASE("miscible paper set") {
    CHECK(critical_amplitude(miscible_params()) ==
          doctest::Approx(4.0 / 1.6977764251006704).epsilon(1e-12));
  }
  SUBCASE("immiscible paper set") {
    CHECK(critical_amplitude(immiscible_params()) ==
          doctest::Approx(41.0).epsilon(2e-2));
  }
  SUBCASE("degenerate mixture reports +infinity") {
    ModelParams params{1.0, 1.0, 50.0, 50.0, 50.0};
    CHECK(std::isinf(critical_amplitude(params)));
  }
}

TEST_CASE("bogoliubov matrix oracle") {
  SUBCASE("matches the closed form on random parameter sets") {
    const SuiteResult res = oracle_equivalence_suite(200, 7);
    CHECK(res.pass);
    CHECK(res.worst <= 1e-9);
  }
  SUBCASE("eigenvector residuals are small") {
    const ModelParams params = miscible_params();
    const CarrierSpec c = make_carrier_equal(params, 2.3, 1.0 / 801.0);
    const BogoliubovModes modes = bogoliubov_matrix(params, c, 0.7);
    CHECK(modes.residual < 1e-10);
  }
  SUBCASE("decoupled matrix block-diagonalizes") {
    ModelParams params{1.0, 1.4, 30.0, 50.0, 0.0};
    const CarrierSpec c = make_carrier(params, 1.1, 0.06, 0.04);
    const double q = 0.9;
    const BogoliubovModes modes = bogoliubov_matrix(params, c, q);
    CHECK(modes.matrix(0, 2) == 0.0);
    CHECK(modes.matrix(2, 0) == 0.0);
    // eigenvalues are the two independent single-species pairs
    std::array<cplx, 4> want;
    int slot = 0;
    for (int sp = 1; sp <= 2; ++sp) {
      const double K = params.hopping(sp);
      const double p = sp == 1 ? c.psi0_1 : c.psi0_2;
      const double d = 2.0 * params.intra(sp) * p * p;
      const double eps = epsilon_q(K, c.k, q);
      const double doppler = 2.0 * K * std::sin(c.k) * std::sin(q);
      const double rad = eps * (eps + d);
      if (rad >= 0.0) {
        want[slot++] = doppler - std::sqrt(rad);
        want[slot++] = doppler + std::sqrt(rad);
      } else {
        want[slot++] = cplx{doppler, -std::sqrt(-rad)};
        want[slot++] = cplx{doppler, std::sqrt(-rad)};
      }
    }
    CHECK(match_eigenvalues(modes.eigenvalues, want) < 1e-10);
  }
  SUBCASE("q = 0 is marginal: the matrix squares to zero") {
    // A_s(0) = B_s makes row 2 = -row 1 and row 4 = -row 3; all four
    // eigenvalues vanish (two Jordan blocks of the phase modes).
    const ModelParams params = miscible_params();
    const CarrierSpec c = make_carrier_equal(params, 1.9, 1.0 / 801.0);
    const BogoliubovModes modes = bogoliubov_matrix(params, c, 0.0);
    const Eigen::Matrix4d sq = modes.matrix * modes.matrix;
    CHECK(sq.norm() < 1e-14);
    for (const cplx& w : modes.eigenvalues) CHECK(std::abs(w) < 1e-7);
  }
}
