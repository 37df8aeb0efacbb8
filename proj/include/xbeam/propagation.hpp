#pragma once

/// \file
/// Propagation along z under the exact and paraxial envelope equations, in
/// free space (angular spectrum) and in a uniform magnetic field (Landau
/// basis). Each step is an exact phase multiplication per spectral component
/// or mode, so there is no z-discretization error in either variant.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xbeam/core.hpp"
#include "xbeam/dispersion.hpp"
#include "xbeam/fft.hpp"
#include "xbeam/modes.hpp"

namespace xbeam::propagation {

enum class Variant { exact, paraxial };

inline std::string_view to_string(Variant v) { return v == Variant::exact ? "exact" : "paraxial"; }

inline Variant variant_from_string(std::string_view s) {
  if (s == "exact") return Variant::exact;
  if (s == "paraxial") return Variant::paraxial;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "' (allowed: exact, paraxial)");
}

/// Backward exact propagation tolerates at most this norm^2 fraction of evanescent content.
inline constexpr double evanescent_threshold = 1e-12;

class EvanescentContentError : public std::runtime_error {
 public:
  explicit EvanescentContentError(double fraction)
      : std::runtime_error("backward exact propagation with evanescent content fraction " +
                           std::to_string(fraction)),
        fraction_(fraction) {}
  double fraction() const { return fraction_; }

 private:
  double fraction_;
};

class TruncationError : public std::runtime_error {
 public:
  TruncationError(double residual, double tolerance)
      : std::runtime_error("Landau decomposition residual " + std::to_string(residual) +
                           " exceeds tolerance " + std::to_string(tolerance)),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// exp(i (kz_variant(kappa) - k) dz) for one free component.
inline complex free_multiplier(double kappa, double k, double dz, Variant variant) {
  if (variant == Variant::paraxial) return std::polar(1.0, -kappa * kappa / (2.0 * k) * dz);
  const complex off = dispersion::kz_exact_offset_free(kappa, k);
  return std::polar(std::exp(-off.imag() * dz), off.real() * dz);
}

inline BeamState propagate_free(const BeamState& state, double dz, Variant variant) {
  const auto& grid = state.grid();
  const double k = state.context().carrier_k;
  std::vector<complex> spec(state.envelope());
  fft::Plan2D plan(grid);
  plan.forward(spec);

  double total = 0.0, evanescent = 0.0, lost = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    const double ky = grid.ky(j);
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double kx = grid.kx(i);
      const double kappa = std::sqrt(kx * kx + ky * ky);
      auto& v = spec[grid.index(i, j)];
      const double p = std::norm(v);
      total += p;
      if (variant == Variant::exact && kappa > k) {
        evanescent += p;
        // Amplifying residual evanescent content backward is not invertible;
        // content below the threshold is dropped instead.
        if (dz < 0.0) {
          lost += p;
          v = 0.0;
          continue;
        }
      }
      v *= free_multiplier(kappa, k, dz, variant);
      lost += p - std::norm(v);
    }
  }
  if (variant == Variant::exact && dz < 0.0 && total > 0.0 &&
      evanescent / total > evanescent_threshold)
    throw EvanescentContentError(evanescent / total);

  plan.backward(spec);
  BeamMetadata meta = state.metadata();
  if (variant == Variant::exact && evanescent > 0.0) {
    // Parseval: sum |F|^2 = N sum |psi|^2.
    const double scale = grid.cell_area() / static_cast<double>(grid.size());
    meta.lost_norm += lost * scale;
  }
  return state.with(std::move(spec), state.z() + dz, std::move(meta));
}

/// Truncated Landau basis used by the magnetic propagator.
struct LandauBasis {
  int n_max = 8;
  int l_min = -8;
  int l_max = 8;
  double tolerance = 1e-10;  // maximum allowed residual (norm^2 fraction)
};

/// exp(i (kz_variant - k) dz) for Landau mode (n, l) with the context's s_z.
inline complex magnetic_multiplier(int n, int l, const PhysicalContext& ctx, double dz,
                                   Variant variant) {
  const double k = ctx.carrier_k;
  const double lambda = dispersion::landau_transverse_eigenvalue({n, l, ctx.s_z}, ctx);
  if (variant == Variant::paraxial) return std::polar(1.0, lambda / (2.0 * k) * dz);
  const complex off = dispersion::kz_exact_offset_from_eigenvalue(lambda, k);
  return std::polar(std::exp(-off.imag() * dz), off.real() * dz);
}

/// Multiplies every coefficient by its mode's phase factor over dz.
inline ModeSpectrum evolve_spectrum(const ModeSpectrum& spectrum, double dz, Variant variant) {
  std::vector<ModeEntry> out = spectrum.entries();
  const auto& ctx = spectrum.context();
  for (auto& e : out) {
    const complex m = magnetic_multiplier(e.n, e.l, ctx, dz, variant);
    if (variant == Variant::exact && dz < 0.0 && std::abs(m) > 1.0) {
      if (std::norm(e.coefficient) > evanescent_threshold) throw EvanescentContentError(std::norm(e.coefficient));
      e.coefficient = 0.0;
      continue;
    }
    e.coefficient *= m;
  }
  return ModeSpectrum(std::move(out), ctx, spectrum.residual_norm(), spectrum.input_norm_squared());
}

/// Magnetic propagator with a precomputed Landau basis, for repeated steps on one grid.
class MagneticPropagator {
 public:
  MagneticPropagator(const TransverseGrid& grid, const PhysicalContext& ctx, const LandauBasis& basis = {})
      : basis_(basis), modes_(grid, ctx, basis.n_max, basis.l_min, basis.l_max) {
    if (!ctx.magnetic())
      throw std::invalid_argument("magnetic propagation requires charge * b_field != 0");
  }

  const modes::LandauModeSet& modes() const { return modes_; }

  BeamState operator()(const BeamState& state, double dz, Variant variant) const {
    if (!(state.context() == modes_.context()))
      throw std::invalid_argument("state context differs from the propagator context");
    const auto spectrum = modes_.decompose(state);
    if (spectrum.residual_norm() > basis_.tolerance)
      throw TruncationError(spectrum.residual_norm(), basis_.tolerance);
    const auto evolved = evolve_spectrum(spectrum, dz, variant);
    auto out = modes_.synthesize(evolved, state.z() + dz);
    BeamMetadata meta = state.metadata();
    meta.truncation_residual = spectrum.residual_norm();
    const double before = spectrum.captured_norm_squared(), after = evolved.captured_norm_squared();
    if (after < before) meta.lost_norm += before - after;
    return out.with(out.envelope(), out.z(), std::move(meta));
  }

 private:
  LandauBasis basis_;
  modes::LandauModeSet modes_;
};

/// Decompose onto the truncated Landau basis, advance each coefficient by its
/// own kz, synthesize. The decomposition residual is carried in metadata.
inline BeamState propagate_magnetic(const BeamState& state, double dz, Variant variant,
                                    const LandauBasis& basis = {}) {
  return MagneticPropagator(state.grid(), state.context(), basis)(state, dz, variant);
}

/// Dispatches on the context: magnetic when charge * b_field != 0.
inline BeamState propagate(const BeamState& state, double dz, Variant variant,
                           const LandauBasis& basis = {}) {
  return state.context().magnetic() ? propagate_magnetic(state, dz, variant, basis)
                                    : propagate_free(state, dz, variant);
}

struct Observables {
  double norm = 0.0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double rms_radius = 0.0;
  double oam_mean = 0.0;  // <-i d/dphi> about the grid centre
};

inline Observables observables(const BeamState& state) {
  const auto& grid = state.grid();
  const auto& psi = state.envelope();
  const double dA = grid.cell_area();

  double w = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double p = std::norm(psi[grid.index(i, j)]);
      w += p;
      mx += p * grid.x(i);
      my += p * grid.y(j);
    }
  if (!(w > 0.0)) throw std::invalid_argument("observables of a zero-norm state");

  Observables o;
  o.norm = std::sqrt(w * dA);
  o.centroid_x = mx / w;
  o.centroid_y = my / w;
  double r2 = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double ddx = grid.x(i) - o.centroid_x, ddy = grid.y(j) - o.centroid_y;
      r2 += std::norm(psi[grid.index(i, j)]) * (ddx * ddx + ddy * ddy);
    }
  o.rms_radius = std::sqrt(r2 / w);

  // -i (x d/dy - y d/dx) with spectral derivatives.
  fft::Plan2D plan(grid);
  std::vector<complex> ddx(psi), ddy;
  plan.forward(ddx);
  ddy = ddx;
  const complex I{0.0, 1.0};
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t q = grid.index(i, j);
      // The Nyquist row/column has no symmetric partner; drop it from derivatives.
      const double kx = (2 * i == grid.nx()) ? 0.0 : grid.kx(i);
      const double ky = (2 * j == grid.ny()) ? 0.0 : grid.ky(j);
      ddx[q] *= I * kx;
      ddy[q] *= I * ky;
    }
  plan.backward(ddx);
  plan.backward(ddy);
  complex lz{};
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t q = grid.index(i, j);
      lz += std::conj(psi[q]) * (-I) * (grid.x(i) * ddy[q] - grid.y(j) * ddx[q]);
    }
  o.oam_mean = lz.real() / w;
  return o;
}

/// sum |Psi_hat|^2 (kz_paraxial - Re kz_exact) / sum |Psi_hat|^2: the spectral
/// mean rate at which the exact field's phase falls behind the paraxial one.
inline double mean_paraxial_phase_lag(const BeamState& state) {
  const auto& grid = state.grid();
  const double k = state.context().carrier_k;
  std::vector<complex> spec(state.envelope());
  fft::Plan2D plan(grid);
  plan.forward(spec);
  double w = 0.0, s = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double p = std::norm(spec[grid.index(i, j)]);
      const double kappa = std::hypot(grid.kx(i), grid.ky(j));
      w += p;
      s += p * dispersion::paraxial_phase_lag(kappa, k);
    }
  return w > 0.0 ? s / w : 0.0;
}

struct ComparisonRow {
  double z = 0.0;
  double l2_distance = 0.0;
  Observables exact;
  Observables paraxial;
  double phase_error = 0.0;  // arg <Psi_paraxial | Psi_exact>
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

/// Propagates `initial` to each z sample (each in one step from the initial
/// plane) under both variants and compares the fields.
inline ComparisonReport compare_variants(const BeamState& initial, const std::vector<double>& z_samples,
                                         const LandauBasis& basis = {}) {
  ComparisonReport report;
  const double dA = initial.grid().cell_area();
  std::optional<MagneticPropagator> magnetic;
  if (initial.context().magnetic()) magnetic.emplace(initial.grid(), initial.context(), basis);
  auto step = [&](double dz, Variant v) {
    return magnetic ? (*magnetic)(initial, dz, v) : propagate_free(initial, dz, v);
  };
  for (double z : z_samples) {
    const double dz = z - initial.z();
    const auto ex = step(dz, Variant::exact);
    const auto px = step(dz, Variant::paraxial);
    ComparisonRow row;
    row.z = z;
    double d = 0.0;
    complex overlap{};
    for (std::size_t q = 0; q < ex.envelope().size(); ++q) {
      d += std::norm(ex.envelope()[q] - px.envelope()[q]);
      overlap += std::conj(px.envelope()[q]) * ex.envelope()[q];
    }
    row.l2_distance = std::sqrt(d * dA);
    row.phase_error = std::arg(overlap);
    row.exact = observables(ex);
    row.paraxial = observables(px);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace xbeam::propagation
