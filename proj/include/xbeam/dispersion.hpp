#pragma once

/// \file
/// Longitudinal wavenumbers of beam components under the exact and paraxial
/// envelope equations.
///
/// Free space: a transverse component kappa has kz = sqrt(k^2 - kappa^2)
/// (exact) or kz = k - kappa^2 / (2k) (paraxial). In a uniform field B e_z a
/// Landau mode with transverse eigenvalue lambda has kz = sqrt(k^2 + lambda)
/// (exact) or k + lambda / (2k) (paraxial). For both media the transverse
/// profile is shared between the two equations; only kz differs.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "xbeam/core.hpp"

namespace xbeam::dispersion {

/// Forward branch sqrt(k^2 - kappa^2); for kappa > k the decaying branch i sqrt(kappa^2 - k^2).
inline complex kz_exact_free(double kappa, double k) {
  const double a = std::abs(kappa);
  if (a <= k) return {std::sqrt((k - a) * (k + a)), 0.0};
  return {0.0, std::sqrt((a - k) * (a + k))};
}

inline double kz_paraxial_free(double kappa, double k) { return k - kappa * kappa / (2.0 * k); }

/// kz_exact - k without cancellation: -kappa^2 / (k + kz) on the propagating branch.
inline complex kz_exact_offset_free(double kappa, double k) {
  const double a = std::abs(kappa);
  if (a <= k) {
    const double s = std::sqrt((k - a) * (k + a));
    return {-a * a / (k + s), 0.0};
  }
  return {-k, std::sqrt((a - k) * (a + k))};
}

/// kz_paraxial - Re kz_exact >= 0, evaluated as kappa^4 / (2k (k + s)^2) on the
/// propagating branch so it stays accurate for kappa << k.
inline double paraxial_phase_lag(double kappa, double k) {
  const double a = std::abs(kappa);
  if (a <= k) {
    const double s = std::sqrt((k - a) * (k + a));
    const double ks = k + s;
    return (a * a) * (a * a) / (2.0 * k * ks * ks);
  }
  return kz_paraxial_free(a, k);
}

/// kz_paraxial - Re kz_exact - kappa^4/(8k^3), i.e. what the leading-order
/// estimate misses: kappa^6 (3k + s) / (8 k^3 (k + s)^3). Propagating branch only.
inline double paraxial_lag_remainder(double kappa, double k) {
  const double a = std::abs(kappa);
  if (a > k) throw std::domain_error("remainder defined for propagating components only");
  const double s = std::sqrt((k - a) * (k + a));
  const double ks = k + s;
  const double a2 = a * a;
  return a2 * a2 * a2 * (3.0 * k + s) / (8.0 * k * k * k * ks * ks * ks);
}

struct CorrectionEigenvalue {
  double estimate = 0.0;  // kappa^4 / (4 k^2)
  double exact = 0.0;     // (k - kz)^2
};

/// Magnitude of the d^2/dz^2 eigenvalue on a propagating free component.
inline CorrectionEigenvalue correction_eigenvalue(double kappa, double k) {
  const double a = std::abs(kappa);
  if (!(a < k)) throw std::invalid_argument("correction estimate requires kappa < k");
  const double d = -kz_exact_offset_free(a, k).real();
  return {a * a * a * a / (4.0 * k * k), d * d};
}

struct LandauIndex {
  int n = 0;
  int l = 0;
  SpinProjection s_z{};
  bool operator==(const LandauIndex&) const = default;
};

/// Eigenvalue of lap_perp - i eB d/dphi - (eB)^2 r^2 / 4 + 2 eB s_z on mode (n, l, s_z):
///   lambda = -|eB| (2n + |l| + 1) + eB l + 2 eB s_z.
/// The sign conventions (signed e, B along +z, exp(i l phi)) are checked
/// against the finite-difference oracle in the test suite.
inline double landau_transverse_eigenvalue(const LandauIndex& idx, const PhysicalContext& ctx) {
  const double eB = ctx.eB();
  if (eB == 0.0) throw std::invalid_argument("no Landau structure: charge * b_field = 0");
  if (idx.n < 0) throw std::invalid_argument("Landau index n must be >= 0");
  if (!spin_projection_allowed(ctx.spin, idx.s_z))
    throw std::invalid_argument("spin projection inconsistent with the context spin tag");
  const double level = 2.0 * idx.n + std::abs(idx.l) + 1.0;
  return -std::abs(eB) * level + eB * idx.l + eB * idx.s_z.twice();
}

/// sqrt(k^2 + lambda), decaying branch when k^2 + lambda < 0.
inline complex kz_exact_from_eigenvalue(double lambda, double k) {
  const double r = k * k + lambda;
  if (r >= 0.0) return {std::sqrt(r), 0.0};
  return {0.0, std::sqrt(-r)};
}

inline double kz_paraxial_from_eigenvalue(double lambda, double k) { return k + lambda / (2.0 * k); }

/// kz_exact - k without cancellation: lambda / (k + sqrt(k^2 + lambda)).
inline complex kz_exact_offset_from_eigenvalue(double lambda, double k) {
  const double r = k * k + lambda;
  if (r >= 0.0) return {lambda / (k + std::sqrt(r)), 0.0};
  return {-k, std::sqrt(-r)};
}

inline complex kz_exact_magnetic(const LandauIndex& idx, const PhysicalContext& ctx) {
  return kz_exact_from_eigenvalue(landau_transverse_eigenvalue(idx, ctx), ctx.carrier_k);
}

inline double kz_paraxial_magnetic(const LandauIndex& idx, const PhysicalContext& ctx) {
  return kz_paraxial_from_eigenvalue(landau_transverse_eigenvalue(idx, ctx), ctx.carrier_k);
}

/// E = sqrt(m^2 + kz^2 - lambda): the positive-energy eigenvalue of
/// sqrt(m^2 + pi^2 - 2 eB s_z) (spin-1/2 and g = 2 spin-1 alike).
inline double landau_energy(const LandauIndex& idx, double kz, const PhysicalContext& ctx) {
  const double lambda = landau_transverse_eigenvalue(idx, ctx);
  const double radicand = ctx.mass * ctx.mass + kz * kz - lambda;
  if (radicand < 0.0) throw std::domain_error("negative radicand in Landau energy");
  return std::sqrt(radicand);
}

/// sqrt(E^2 - kz^2) of a photon component; equals kappa.
inline double photon_effective_mass(double kappa, double energy) {
  if (!(kappa >= 0.0) || kappa > energy)
    throw std::invalid_argument("photon effective mass requires 0 <= kappa <= E");
  const double kz = kz_exact_free(kappa, energy).real();
  return std::sqrt((energy - kz) * (energy + kz));
}

/// kz / E, strictly below 1 for any kappa > 0.
inline double photon_group_velocity(double kappa, double energy) {
  if (!(kappa >= 0.0) || kappa > energy)
    throw std::invalid_argument("photon group velocity requires 0 <= kappa <= E");
  return kz_exact_free(kappa, energy).real() / energy;
}

namespace detail {
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline DispersionRecord free_dispersion_record(double kappa, double k) {
  DispersionRecord r;
  r.label = "kappa=" + detail::format_number(kappa);
  r.kappa_or_lambda = kappa;
  r.kz_exact = kz_exact_free(kappa, k);
  r.kz_paraxial = kz_paraxial_free(kappa, k);
  r.phase_error_rate = paraxial_phase_lag(kappa, k);
  if (std::abs(kappa) < k) {
    const auto c = correction_eigenvalue(kappa, k);
    r.correction_estimate = c.estimate;
    r.correction_exact = c.exact;
  } else {
    r.correction_estimate = std::numeric_limits<double>::quiet_NaN();
    r.correction_exact = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

inline DispersionRecord magnetic_dispersion_record(const LandauIndex& idx,
                                                   const PhysicalContext& ctx) {
  const double k = ctx.carrier_k;
  const double lambda = landau_transverse_eigenvalue(idx, ctx);
  DispersionRecord r;
  r.label = "n" + std::to_string(idx.n) + "_l" + std::to_string(idx.l) + "_sz" +
            (idx.s_z.twice() % 2 == 0 ? std::to_string(idx.s_z.twice() / 2)
                                      : std::to_string(idx.s_z.twice()) + "/2");
  r.kappa_or_lambda = lambda;
  r.kz_exact = kz_exact_from_eigenvalue(lambda, k);
  r.kz_paraxial = kz_paraxial_from_eigenvalue(lambda, k);
  const complex off = kz_exact_offset_from_eigenvalue(lambda, k);
  if (k * k + lambda >= 0.0) {
    const double ks = k + std::sqrt(k * k + lambda);
    r.phase_error_rate = lambda * lambda / (2.0 * k * ks * ks);
  } else {
    r.phase_error_rate = std::abs(off.real() - lambda / (2.0 * k));
  }
  r.correction_estimate = lambda * lambda / (4.0 * k * k);
  r.correction_exact = off.real() * off.real();
  return r;
}

}  // namespace xbeam::dispersion
