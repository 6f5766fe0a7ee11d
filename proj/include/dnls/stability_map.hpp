#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "dnls/bogoliubov.hpp"
#include "dnls/model.hpp"

// (q, k)-plane sweeps: classify every grid cell with the closed-form
// spectrum and export the phase diagram as CSV.

namespace dnls {

struct GridSpec {
  std::size_t k_steps = 400;
  std::size_t q_steps = 400;
  double k_min = 0.0;
  double k_max = two_pi;  // exclusive
  double q_min = 0.0;
  double q_max = two_pi;  // exclusive

  void validate() const {
    if (k_steps < 2 || q_steps < 2)
      throw model_error("GridSpec: need at least 2 steps per axis");
    if (!(k_max > k_min) || !(q_max > q_min))
      throw model_error("GridSpec: empty axis range");
  }

  double k_at(std::size_t i) const {
    return k_min + static_cast<double>(i) * (k_max - k_min) /
                       static_cast<double>(k_steps);
  }
  double q_at(std::size_t j) const {
    return q_min + static_cast<double>(j) * (q_max - q_min) /
                       static_cast<double>(q_steps);
  }
};

struct StabilityCell {
  double k = 0.0;
  double q = 0.0;
  double epsilon = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double growth1 = 0.0;
  double growth2 = 0.0;
  StabilityClass cls;
};

struct StabilityGrid {
  GridSpec spec;
  std::vector<StabilityCell> cells;  // row-major, k outer, q inner

  const StabilityCell& at(std::size_t ik, std::size_t iq) const {
    return cells[ik * spec.q_steps + iq];
  }
  std::size_t failed_count() const {
    std::size_t n = 0;
    for (const auto& c : cells)
      if (c.cls.kind == StabilityClass::Kind::Failed) ++n;
    return n;
  }
};

// Equal-amplitude sweep of the (q, k) plane. Rows may be evaluated by
// several workers; the output ordering is row-major regardless.
inline StabilityGrid scan_plane(const ModelParams& params, double psi0_sq,
                                const GridSpec& grid, unsigned workers = 1) {
  params.validate();
  grid.validate();
  if (!(psi0_sq > 0.0))
    throw model_error("scan_plane: psi0^2 must be positive");

  StabilityGrid out;
  out.spec = grid;
  out.cells.resize(grid.k_steps * grid.q_steps);

  const auto scan_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t ik = row_begin; ik < row_end; ++ik) {
      const double k = grid.k_at(ik);
      const CarrierSpec carrier = make_carrier_equal(params, k, psi0_sq);
      for (std::size_t iq = 0; iq < grid.q_steps; ++iq) {
        StabilityCell& cell = out.cells[ik * grid.q_steps + iq];
        cell.k = k;
        cell.q = grid.q_at(iq);
        try {
          const SpectrumResult r = spectrum(params, carrier, cell.q);
          cell.epsilon = r.epsilon;
          cell.delta1 = r.delta1;
          cell.delta2 = r.delta2;
          cell.growth1 = r.growth1;
          cell.growth2 = r.growth2;
          cell.cls = StabilityClass::from_growth(r.growth1, r.growth2);
        } catch (const model_error&) {
          cell.cls.kind = StabilityClass::Kind::Failed;
        }
      }
    }
  };

  if (workers <= 1) {
    scan_rows(0, grid.k_steps);
  } else {
    const std::size_t n = std::min<std::size_t>(workers, grid.k_steps);
    std::vector<std::thread> pool;
    pool.reserve(n);
    const std::size_t chunk = (grid.k_steps + n - 1) / n;
    for (std::size_t w = 0; w < n; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(lo + chunk, grid.k_steps);
      if (lo >= hi) break;
      pool.emplace_back(scan_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

struct ThresholdDetail {
  double onset = 0.0;   // minimal psi0^2 at which instability onsets
  double onset1 = 0.0;  // branch-1 onset
  double onset2 = 0.0;  // branch-2 onset
};

// Onset density for instability at (k, q), equal amplitudes:
// miscible, cos k < 0: -eps/Omega_s; immiscible: eps/|Omega_1| for
// cos k > 0 and -eps/Omega_2 for cos k < 0. No onset -> +infinity.
inline ThresholdDetail threshold_curve_detail(const ModelParams& params,
                                              double k, double q) {
  detail::require_equal_hopping(params, "threshold_curve");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double eps = epsilon_q(params.K1, k, q);
  const double omega1 = omega_uniform(params, 1);
  const double omega2 = omega_uniform(params, 2);

  ThresholdDetail d{inf, inf, inf};
  if (eps == 0.0) return d;
  if (eps < 0.0) {
    // Unstable branch needs eps + Omega_s psi0^2 > 0.
    if (omega1 > 0.0) d.onset1 = -eps / omega1;
    if (omega2 > 0.0) d.onset2 = -eps / omega2;
  } else {
    // Needs eps + Omega_s psi0^2 < 0, possible only for Omega_1 < 0.
    if (omega1 < 0.0) d.onset1 = eps / -omega1;
  }
  d.onset = std::min(d.onset1, d.onset2);
  return d;
}

inline double threshold_curve(const ModelParams& params, double k, double q) {
  return threshold_curve_detail(params, k, q).onset;
}

namespace detail {

inline std::string fmt_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

// Header `k,q,eps_q,delta1,delta2,growth1,growth2,class`, rows in
// row-major (k outer) order, 9 significant digits, LF line endings.
inline void export_csv(const StabilityGrid& grid,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw model_error("export_csv: cannot open " + path.string());
  out << "k,q,eps_q,delta1,delta2,growth1,growth2,class\n";
  for (const auto& c : grid.cells) {
    out << detail::fmt_g9(c.k) << ',' << detail::fmt_g9(c.q) << ','
        << detail::fmt_g9(c.epsilon) << ',' << detail::fmt_g9(c.delta1) << ','
        << detail::fmt_g9(c.delta2) << ',' << detail::fmt_g9(c.growth1) << ','
        << detail::fmt_g9(c.growth2) << ',' << c.cls.label() << '\n';
  }
  if (!out)
    throw model_error("export_csv: write failed for " + path.string());
}

inline std::map<std::string, std::size_t> class_counts(
    const StabilityGrid& grid) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : grid.cells) ++counts[c.cls.label()];
  return counts;
}

}  // namespace dnls
