#pragma once

/// \file
/// Transverse beam profiles and Landau-basis decomposition.
///
/// Laguerre-Gauss convention (shared by the Landau family):
///
///   u_{p,l}(r, phi) = sqrt(2 p! / (pi (p+|l|)!)) / w * (sqrt(2) r / w)^{|l|}
///                     * L_p^{|l|}(2 r^2 / w^2) * exp(-r^2 / w^2) * exp(i l phi)
///
/// which has unit norm over the plane. Landau modes are u_{n,l} at the
/// magnetic waist w_B = 2 / sqrt(|eB|); with that waist they are exact
/// eigenfunctions of lap_perp - i eB d/dphi - (eB)^2 r^2 / 4.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xbeam/core.hpp"
#include "xbeam/dispersion.hpp"
#include "xbeam/fft.hpp"

namespace xbeam::modes {

enum class ModeFamily { gaussian, laguerre_gauss, hermite_gauss, bessel, landau };

inline constexpr std::string_view family_names = "gaussian, laguerre_gauss, hermite_gauss, bessel, landau";

inline std::string_view to_string(ModeFamily f) {
  switch (f) {
    case ModeFamily::gaussian: return "gaussian";
    case ModeFamily::laguerre_gauss: return "laguerre_gauss";
    case ModeFamily::hermite_gauss: return "hermite_gauss";
    case ModeFamily::bessel: return "bessel";
    case ModeFamily::landau: return "landau";
  }
  return "?";
}

inline ModeFamily family_from_string(std::string_view s) {
  if (s == "gaussian") return ModeFamily::gaussian;
  if (s == "laguerre_gauss") return ModeFamily::laguerre_gauss;
  if (s == "hermite_gauss") return ModeFamily::hermite_gauss;
  if (s == "bessel") return ModeFamily::bessel;
  if (s == "landau") return ModeFamily::landau;
  throw std::invalid_argument("unknown mode family '" + std::string(s) + "' (allowed: " +
                              std::string(family_names) + ")");
}

/// Family-specific fields are ignored by families that do not use them.
struct ModeRequest {
  ModeFamily family = ModeFamily::gaussian;
  double waist = 1.0;  // w0; unused by landau (w_B) and bessel
  int p = 0;           // radial index (LG p, Landau n)
  int l = 0;           // azimuthal index (LG, Landau, Bessel order)
  int m = 0;           // Hermite-Gauss x order
  int n = 0;           // Hermite-Gauss y order
  double kappa0 = 0.0;           // Bessel transverse wavenumber
  double aperture_radius = 0.0;  // Bessel super-Gaussian aperture radius
  int aperture_order = 8;        // exp(-(r/R)^(2 order))
  double center_x = 0.0;
  double center_y = 0.0;

  static ModeRequest gaussian(double w0) {
    ModeRequest r;
    r.family = ModeFamily::gaussian;
    r.waist = w0;
    return r;
  }
  static ModeRequest laguerre_gauss(double w0, int p, int l) {
    ModeRequest r = gaussian(w0);
    r.family = ModeFamily::laguerre_gauss;
    r.p = p;
    r.l = l;
    return r;
  }
  static ModeRequest hermite_gauss(double w0, int m, int n) {
    ModeRequest r = gaussian(w0);
    r.family = ModeFamily::hermite_gauss;
    r.m = m;
    r.n = n;
    return r;
  }
  static ModeRequest bessel(double kappa0, int l, double aperture_radius) {
    ModeRequest r;
    r.family = ModeFamily::bessel;
    r.kappa0 = kappa0;
    r.l = l;
    r.aperture_radius = aperture_radius;
    return r;
  }
  static ModeRequest landau(int n, int l) {
    ModeRequest r;
    r.family = ModeFamily::landau;
    r.p = n;
    r.l = l;
    return r;
  }
};

inline double magnetic_waist(const PhysicalContext& ctx) {
  if (!ctx.magnetic()) throw std::invalid_argument("magnetic waist requires charge * b_field != 0");
  return 2.0 / std::sqrt(std::abs(ctx.eB()));
}

namespace detail {

inline double factorial_ratio(int p, int a) {
  // p! / (p + a)!
  double r = 1.0;
  for (int i = p + 1; i <= p + a; ++i) r /= static_cast<double>(i);
  return r;
}

/// Unnormalized-phase LG profile value at (x, y) for waist w, without the z-dependent factors.
inline complex lg_value(double x, double y, double w, int p, int l) {
  const int al = std::abs(l);
  const double r2 = x * x + y * y;
  const double s = 2.0 * r2 / (w * w);
  const double norm = std::sqrt(2.0 * factorial_ratio(p, al) / std::numbers::pi) / w;
  const double radial = norm * std::pow(std::sqrt(s), al) *
                        std::assoc_laguerre(static_cast<unsigned>(p), static_cast<unsigned>(al), s) *
                        std::exp(-r2 / (w * w));
  if (l == 0) return {radial, 0.0};
  const double phi = l * std::atan2(y, x);
  return {radial * std::cos(phi), radial * std::sin(phi)};
}

inline double hg_factor(double u, double w, int order) {
  // 1D unit-norm Hermite-Gauss factor.
  double fact = 1.0;
  for (int i = 2; i <= order; ++i) fact *= i;
  const double c = std::pow(2.0 / std::numbers::pi, 0.25) /
                   std::sqrt(w * std::pow(2.0, order) * fact);
  const double a = std::sqrt(2.0) * u / w;
  return c * std::hermite(static_cast<unsigned>(order), a) * std::exp(-u * u / (w * w));
}

/// Fraction of spectral power beyond 0.8 of the Nyquist wavenumber on either axis.
inline double high_frequency_fraction(const TransverseGrid& grid, std::vector<complex> field) {
  fft::Plan2D plan(grid);
  plan.forward(field);
  double total = 0.0, high = 0.0;
  const double cx = 0.8 * grid.nyquist_x(), cy = 0.8 * grid.nyquist_y();
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double p = std::norm(field[grid.index(i, j)]);
      total += p;
      if (std::abs(grid.kx(i)) > cx || std::abs(grid.ky(j)) > cy) high += p;
    }
  return total > 0.0 ? high / total : 0.0;
}

/// Fraction of norm^2 in the outermost 1/16 of the window on each side.
inline double edge_fraction(const TransverseGrid& grid, const std::vector<complex>& field) {
  const std::size_t bx = std::max<std::size_t>(1, grid.nx() / 16);
  const std::size_t by = std::max<std::size_t>(1, grid.ny() / 16);
  double total = 0.0, edge = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double p = std::norm(field[grid.index(i, j)]);
      total += p;
      if (i < bx || i >= grid.nx() - bx || j < by || j >= grid.ny() - by) edge += p;
    }
  return total > 0.0 ? edge / total : 0.0;
}

inline constexpr double sampling_threshold = 1e-12;

}  // namespace detail

/// Samples a Landau mode (n, l) on the grid; unit norm in the continuum.
inline std::vector<complex> landau_mode_field(const TransverseGrid& grid, double w_b, int n, int l,
                                              double cx = 0.0, double cy = 0.0) {
  std::vector<complex> out(grid.size());
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i)
      out[grid.index(i, j)] = detail::lg_value(grid.x(i) - cx, grid.y(j) - cy, w_b, n, l);
  return out;
}

/// Unit-norm beam for the request at position z.
///
/// Gaussian, Laguerre-Gauss and Hermite-Gauss profiles at z != 0 follow the
/// closed-form paraxial free-space solution (waist w(z), curvature, Gouy
/// phase). Landau modes carry the exact eigenphase exp(i (kz - k) z). Bessel
/// profiles are only generated at z = 0.
inline BeamState generate(const ModeRequest& req, const TransverseGrid& grid,
                          const PhysicalContext& ctx, double z = 0.0) {
  std::vector<complex> field(grid.size());
  const double k = ctx.carrier_k;
  double w_check = req.waist;

  auto paraxial_envelope = [&](double w0, int gouy_order, auto&& profile) {
    const double zr = k * w0 * w0 / 2.0;
    const double zeta = z / zr;
    const double w = w0 * std::sqrt(1.0 + zeta * zeta);
    // k / (2R) with R = z (1 + (zR/z)^2), finite at z = 0.
    const double curvature = zeta / (w0 * w0 * (1.0 + zeta * zeta));
    const complex gouy = std::polar(1.0, -(gouy_order + 1) * std::atan(zeta));
    for (std::size_t j = 0; j < grid.ny(); ++j)
      for (std::size_t i = 0; i < grid.nx(); ++i) {
        const double x = grid.x(i) - req.center_x, y = grid.y(j) - req.center_y;
        field[grid.index(i, j)] =
            profile(x, y, w) * std::polar(1.0, curvature * (x * x + y * y)) * gouy;
      }
  };

  switch (req.family) {
    case ModeFamily::gaussian:
    case ModeFamily::laguerre_gauss: {
      if (!(req.waist > 0.0)) throw std::invalid_argument("waist must be > 0");
      const int p = req.family == ModeFamily::gaussian ? 0 : req.p;
      const int l = req.family == ModeFamily::gaussian ? 0 : req.l;
      if (p < 0) throw std::invalid_argument("radial index p must be >= 0");
      paraxial_envelope(req.waist, 2 * p + std::abs(l),
                        [&](double x, double y, double w) { return detail::lg_value(x, y, w, p, l); });
      break;
    }
    case ModeFamily::hermite_gauss: {
      if (!(req.waist > 0.0)) throw std::invalid_argument("waist must be > 0");
      if (req.m < 0 || req.n < 0) throw std::invalid_argument("Hermite-Gauss orders must be >= 0");
      paraxial_envelope(req.waist, req.m + req.n, [&](double x, double y, double w) {
        return complex{detail::hg_factor(x, w, req.m) * detail::hg_factor(y, w, req.n), 0.0};
      });
      break;
    }
    case ModeFamily::bessel: {
      if (z != 0.0) throw std::invalid_argument("bessel profiles are only generated at z = 0");
      if (!(req.kappa0 > 0.0) || !(req.kappa0 < k))
        throw std::invalid_argument("bessel mode requires 0 < kappa0 < k");
      if (!(req.aperture_radius > 0.0)) throw std::invalid_argument("bessel aperture radius must be > 0");
      if (req.aperture_order < 1) throw std::invalid_argument("aperture order must be >= 1");
      const double R = req.aperture_radius;
      const int two_n = 2 * req.aperture_order;
      for (std::size_t j = 0; j < grid.ny(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i) {
          const double x = grid.x(i) - req.center_x, y = grid.y(j) - req.center_y;
          const double r = std::hypot(x, y);
          const double amp = std::cyl_bessel_j(static_cast<double>(std::abs(req.l)), req.kappa0 * r) *
                             std::exp(-std::pow(r / R, two_n));
          // J_{-l} = (-1)^l J_l
          const double sign = (req.l < 0 && (std::abs(req.l) % 2 == 1)) ? -1.0 : 1.0;
          const double phi = req.l * std::atan2(y, x);
          field[grid.index(i, j)] = sign * amp * complex{std::cos(phi), std::sin(phi)};
        }
      w_check = 2.0 / req.kappa0;
      break;
    }
    case ModeFamily::landau: {
      if (req.p < 0) throw std::invalid_argument("Landau index n must be >= 0");
      const double w_b = magnetic_waist(ctx);
      w_check = w_b;
      field = landau_mode_field(grid, w_b, req.p, req.l, req.center_x, req.center_y);
      if (z != 0.0) {
        const dispersion::LandauIndex idx{req.p, req.l, ctx.s_z};
        const double lambda = dispersion::landau_transverse_eigenvalue(idx, ctx);
        const complex off = dispersion::kz_exact_offset_from_eigenvalue(lambda, k);
        const complex phase = std::exp(complex{0.0, 1.0} * off * z);
        for (auto& v : field) v *= phase;
      }
      break;
    }
  }

  BeamState state(grid, ctx, z, std::move(field));
  const double nrm = state.norm();
  if (!(nrm > 0.0)) throw std::invalid_argument("generated profile vanishes on the grid");

  // Analytic families are normalized in the continuum; the apertured Bessel
  // profile has no closed-form norm.
  if (req.family == ModeFamily::bessel) state = state.normalized();

  BeamMetadata meta = state.metadata();
  if (w_check < 4.0 * std::min(grid.dx(), grid.dy()))
    meta.warnings.push_back("waist below 4 grid spacings");
  if (detail::high_frequency_fraction(grid, state.envelope()) > detail::sampling_threshold)
    meta.warnings.push_back("spectral content above 0.8 Nyquist");
  if (detail::edge_fraction(grid, state.envelope()) > detail::sampling_threshold)
    meta.warnings.push_back("profile reaches the grid edge");
  return state.with(state.envelope(), z, std::move(meta));
}

/// Landau mode fields for n in [0, n_max], l in [l_min, l_max], sampled once
/// on a grid and reused for decomposition and synthesis.
class LandauModeSet {
 public:
  LandauModeSet(const TransverseGrid& grid, const PhysicalContext& ctx, int n_max, int l_min,
                int l_max)
      : grid_(grid), ctx_(ctx) {
    if (n_max < 0 || l_min > l_max)
      throw std::invalid_argument("truncation bounds must select at least one mode");
    const double w_b = magnetic_waist(ctx);
    for (int l = l_min; l <= l_max; ++l)
      for (int n = 0; n <= n_max; ++n) {
        keys_.emplace_back(n, l);
        fields_.push_back(landau_mode_field(grid, w_b, n, l));
      }
  }

  const TransverseGrid& grid() const { return grid_; }
  const PhysicalContext& context() const { return ctx_; }
  std::size_t size() const { return keys_.size(); }

  /// Grid inner products <mode | Psi> dx dy, with the residual measured directly
  /// as ||Psi - sum c mode||^2 / ||Psi||^2.
  ModeSpectrum decompose(const BeamState& state) const {
    if (!(state.grid() == grid_)) throw std::invalid_argument("state grid differs from the mode set grid");
    const auto& psi = state.envelope();
    const double dA = grid_.cell_area();
    std::vector<ModeEntry> entries;
    entries.reserve(keys_.size());
    std::vector<complex> remainder(psi);
    for (std::size_t m = 0; m < keys_.size(); ++m) {
      const auto& mode = fields_[m];
      complex c{};
      for (std::size_t q = 0; q < psi.size(); ++q) c += std::conj(mode[q]) * psi[q];
      c *= dA;
      for (std::size_t q = 0; q < psi.size(); ++q) remainder[q] -= c * mode[q];
      entries.push_back({keys_[m].first, keys_[m].second, c});
    }
    const double input = state.norm_squared();
    double rem = 0.0;
    for (const auto& v : remainder) rem += std::norm(v);
    rem *= dA;
    return ModeSpectrum(std::move(entries), ctx_, input > 0.0 ? rem / input : 0.0, input);
  }

  /// Sum of coefficient * mode; entries outside the set are sampled on demand.
  BeamState synthesize(const ModeSpectrum& spectrum, double z = 0.0) const {
    std::vector<complex> field(grid_.size());
    for (const auto& e : spectrum.entries()) {
      if (e.coefficient == complex{}) continue;
      const std::vector<complex>* mode = nullptr;
      std::vector<complex> scratch;
      for (std::size_t m = 0; m < keys_.size(); ++m)
        if (keys_[m].first == e.n && keys_[m].second == e.l) mode = &fields_[m];
      if (!mode) {
        scratch = landau_mode_field(grid_, magnetic_waist(ctx_), e.n, e.l);
        mode = &scratch;
      }
      for (std::size_t q = 0; q < field.size(); ++q) field[q] += e.coefficient * (*mode)[q];
    }
    BeamMetadata meta;
    meta.truncation_residual = spectrum.residual_norm();
    return BeamState(grid_, ctx_, z, std::move(field), std::move(meta));
  }

 private:
  TransverseGrid grid_;
  PhysicalContext ctx_;
  std::vector<std::pair<int, int>> keys_;
  std::vector<std::vector<complex>> fields_;
};

/// Grid inner products <mode | Psi> dx dy over n in [0, n_max], l in [l_min, l_max].
inline ModeSpectrum decompose_landau(const BeamState& state, const PhysicalContext& ctx, int n_max,
                                     int l_min, int l_max) {
  return LandauModeSet(state.grid(), ctx, n_max, l_min, l_max).decompose(state);
}

/// Sum of coefficient * mode on the grid.
inline BeamState synthesize(const ModeSpectrum& spectrum, const TransverseGrid& grid,
                            const PhysicalContext& ctx, double z = 0.0) {
  std::vector<complex> field(grid.size());
  if (!spectrum.empty()) {
    const double w_b = magnetic_waist(ctx);
    for (const auto& e : spectrum.entries()) {
      if (e.coefficient == complex{}) continue;
      const auto mode = landau_mode_field(grid, w_b, e.n, e.l);
      for (std::size_t q = 0; q < field.size(); ++q) field[q] += e.coefficient * mode[q];
    }
  }
  BeamMetadata meta;
  meta.truncation_residual = spectrum.residual_norm();
  return BeamState(grid, ctx, z, std::move(field), std::move(meta));
}

}  // namespace xbeam::modes
