#pragma once

/// \file
/// Shared data model: particle context, transverse grid, beam envelope,
/// mode spectrum and dispersion records.
///
/// Units are natural throughout (hbar = c = 1). A beam's full wave function
/// is exp(i k z) * Psi(x, y; z), where k is the carrier wavenumber stored in
/// the PhysicalContext and Psi is the envelope held by BeamState.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xbeam {

using complex = std::complex<double>;

enum class SpinTag { spinless, spin_half, spin_one, photon };

inline std::string_view to_string(SpinTag tag) {
  switch (tag) {
    case SpinTag::spinless: return "spinless";
    case SpinTag::spin_half: return "spin-1/2";
    case SpinTag::spin_one: return "spin-1";
    case SpinTag::photon: return "photon";
  }
  return "?";
}

inline SpinTag spin_tag_from_string(std::string_view s) {
  if (s == "spinless") return SpinTag::spinless;
  if (s == "spin-1/2") return SpinTag::spin_half;
  if (s == "spin-1") return SpinTag::spin_one;
  if (s == "photon") return SpinTag::photon;
  throw std::invalid_argument("unknown spin tag '" + std::string(s) +
                              "' (allowed: spinless, spin-1/2, spin-1, photon)");
}

/// Spin projection s_z, stored exactly as the integer 2 s_z.
class SpinProjection {
 public:
  constexpr SpinProjection() = default;

  static constexpr SpinProjection from_twice(int twice) { return SpinProjection(twice); }

  /// Accepts only exact half-integers.
  static SpinProjection from_double(double s) {
    const double t = 2.0 * s;
    if (!std::isfinite(t) || t != std::round(t) || std::abs(t) > 64.0)
      throw std::invalid_argument("spin projection must be a half-integer, got " +
                                  std::to_string(s));
    return SpinProjection(static_cast<int>(t));
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr SpinProjection operator-() const { return SpinProjection(-twice_); }
  constexpr bool operator==(const SpinProjection&) const = default;

 private:
  constexpr explicit SpinProjection(int twice) : twice_(twice) {}
  int twice_ = 0;
};

inline bool spin_projection_allowed(SpinTag tag, SpinProjection s) {
  switch (tag) {
    case SpinTag::spinless: return s.twice() == 0;
    case SpinTag::spin_half: return s.twice() == 1 || s.twice() == -1;
    case SpinTag::spin_one:
    case SpinTag::photon: return s.twice() == -2 || s.twice() == 0 || s.twice() == 2;
  }
  return false;
}

/// Particle and beam constants. Build through make_context so the invariants hold.
struct PhysicalContext {
  double mass = 0.0;
  double energy = 1.0;
  double charge = 0.0;
  double b_field = 0.0;
  SpinTag spin = SpinTag::spinless;
  SpinProjection s_z{};
  double carrier_k = 1.0;  // P = sqrt(E^2 - m^2)

  /// Signed product e*B; every magnetic formula goes through it.
  double eB() const { return charge * b_field; }
  bool magnetic() const { return eB() != 0.0; }

  bool operator==(const PhysicalContext&) const = default;
};

inline PhysicalContext make_context(double mass, double energy, double charge, double b_field,
                                    SpinTag tag, SpinProjection s_z) {
  if (!std::isfinite(mass) || !std::isfinite(energy) || !std::isfinite(charge) ||
      !std::isfinite(b_field))
    throw std::invalid_argument("context parameters must be finite");
  if (mass < 0.0) throw std::invalid_argument("mass must be >= 0");
  if (!(energy > mass)) throw std::invalid_argument("no propagating carrier: energy <= mass");
  if (!spin_projection_allowed(tag, s_z))
    throw std::invalid_argument("spin projection " + std::to_string(s_z.value()) +
                                " is not allowed for " + std::string(to_string(tag)));
  if (tag == SpinTag::photon && (mass != 0.0 || charge != 0.0))
    throw std::invalid_argument("photon context requires mass = 0 and charge = 0");

  PhysicalContext ctx;
  ctx.mass = mass;
  ctx.energy = energy;
  ctx.charge = charge;
  ctx.b_field = b_field;
  ctx.spin = tag;
  ctx.s_z = s_z;
  // (E - m)(E + m) keeps full relative accuracy when E is close to m.
  ctx.carrier_k = mass == 0.0 ? energy : std::sqrt((energy - mass) * (energy + mass));
  return ctx;
}

inline PhysicalContext make_photon_context(double energy) {
  return make_context(0.0, energy, 0.0, 0.0, SpinTag::photon, SpinProjection{});
}

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Uniform transverse sampling. Sample i sits at x = (i - nx/2) dx, so the
/// grid centre (the origin for polar quantities) is sample nx/2.
class TransverseGrid {
 public:
  TransverseGrid() = default;
  TransverseGrid(std::size_t nx, std::size_t ny, double dx, double dy)
      : nx_(nx), ny_(ny), dx_(dx), dy_(dy) {
    if (!is_power_of_two(nx) || !is_power_of_two(ny))
      throw std::invalid_argument("grid dimensions must be powers of two");
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
      throw std::invalid_argument("grid spacing must be positive and finite");
  }

  static TransverseGrid square(std::size_t n, double spacing) {
    return TransverseGrid(n, n, spacing, spacing);
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  std::size_t size() const { return nx_ * ny_; }
  double cell_area() const { return dx_ * dy_; }
  double extent_x() const { return static_cast<double>(nx_) * dx_; }
  double extent_y() const { return static_cast<double>(ny_) * dy_; }

  double x(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(nx_ / 2)) * dx_;
  }
  double y(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(ny_ / 2)) * dy_;
  }

  /// Spectral wavenumbers in standard FFT wraparound order.
  double kx(std::size_t i) const { return wavenumber(i, nx_, dx_); }
  double ky(std::size_t j) const { return wavenumber(j, ny_, dy_); }
  double nyquist_x() const { return std::numbers::pi / dx_; }
  double nyquist_y() const { return std::numbers::pi / dy_; }

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }

  bool operator==(const TransverseGrid&) const = default;

 private:
  static double wavenumber(std::size_t i, std::size_t n, double d) {
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    auto m = static_cast<std::ptrdiff_t>(i);
    if (m >= half) m -= static_cast<std::ptrdiff_t>(n);
    return 2.0 * std::numbers::pi * static_cast<double>(m) / (static_cast<double>(n) * d);
  }

  std::size_t nx_ = 1;
  std::size_t ny_ = 1;
  double dx_ = 1.0;
  double dy_ = 1.0;
};

/// Bookkeeping attached to a state by generators and propagators.
struct BeamMetadata {
  double original_norm = std::numeric_limits<double>::quiet_NaN();  // before normalization
  double lost_norm = 0.0;            // norm^2 removed by evanescent damping, accumulated
  double truncation_residual = 0.0;  // latest basis-truncation residual (norm^2 fraction)
  std::vector<std::string> warnings;
};

/// Envelope Psi(x, y) at longitudinal position z. Row-major, y is the slow index.
class BeamState {
 public:
  BeamState(TransverseGrid grid, PhysicalContext context, double z, std::vector<complex> envelope,
            BeamMetadata meta = {})
      : grid_(grid), context_(context), z_(z), envelope_(std::move(envelope)),
        meta_(std::move(meta)) {
    if (envelope_.size() != grid_.size())
      throw std::invalid_argument("envelope size does not match grid");
  }

  static BeamState zeros(const TransverseGrid& grid, const PhysicalContext& ctx, double z = 0.0) {
    return BeamState(grid, ctx, z, std::vector<complex>(grid.size()));
  }

  const TransverseGrid& grid() const { return grid_; }
  const PhysicalContext& context() const { return context_; }
  double z() const { return z_; }
  const std::vector<complex>& envelope() const { return envelope_; }
  const BeamMetadata& metadata() const { return meta_; }
  const complex& at(std::size_t i, std::size_t j) const { return envelope_[grid_.index(i, j)]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& v : envelope_) s += std::norm(v);
    return s * grid_.cell_area();
  }
  double norm() const { return std::sqrt(norm_squared()); }

  /// Copy with a new envelope / position; grid and context are kept.
  BeamState with(std::vector<complex> envelope, double z, BeamMetadata meta) const {
    return BeamState(grid_, context_, z, std::move(envelope), std::move(meta));
  }

  /// Unit-norm copy; the previous norm is recorded in metadata.original_norm.
  BeamState normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize a zero-norm beam");
    std::vector<complex> out(envelope_);
    for (auto& v : out) v /= n;
    BeamMetadata meta = meta_;
    meta.original_norm = n;
    return with(std::move(out), z_, std::move(meta));
  }

 private:
  TransverseGrid grid_;
  PhysicalContext context_;
  double z_ = 0.0;
  std::vector<complex> envelope_;
  BeamMetadata meta_;
};

/// sqrt(sum |Psi|^2 dx dy).
inline double beam_norm(const BeamState& state) { return state.norm(); }

struct ModeEntry {
  int n = 0;
  int l = 0;
  complex coefficient{};
  bool operator==(const ModeEntry&) const = default;
};

/// Coefficients over Landau / Laguerre-Gauss modes (n, l).
class ModeSpectrum {
 public:
  ModeSpectrum() = default;
  ModeSpectrum(std::vector<ModeEntry> entries, PhysicalContext context, double residual_norm,
               double input_norm_squared = std::numeric_limits<double>::quiet_NaN())
      : entries_(std::move(entries)), context_(context), residual_norm_(residual_norm),
        input_norm_squared_(input_norm_squared) {
    if (!(residual_norm_ >= 0.0)) throw std::invalid_argument("residual_norm must be >= 0");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : entries_) {
      if (e.n < 0) throw std::invalid_argument("mode index n must be >= 0");
      if (!seen.emplace(e.n, e.l).second)
        throw std::invalid_argument("duplicate mode (" + std::to_string(e.n) + ", " +
                                    std::to_string(e.l) + ") in spectrum");
    }
  }

  const std::vector<ModeEntry>& entries() const { return entries_; }
  const PhysicalContext& context() const { return context_; }
  /// Fraction of the input norm^2 not captured by the listed modes.
  double residual_norm() const { return residual_norm_; }
  double input_norm_squared() const { return input_norm_squared_; }
  bool empty() const { return entries_.empty(); }

  double captured_norm_squared() const {
    double s = 0.0;
    for (const auto& e : entries_) s += std::norm(e.coefficient);
    return s;
  }

  const ModeEntry* find(int n, int l) const {
    for (const auto& e : entries_)
      if (e.n == n && e.l == l) return &e;
    return nullptr;
  }

  bool operator==(const ModeSpectrum& o) const {
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return entries_ == o.entries_ && context_ == o.context_ && residual_norm_ == o.residual_norm_ &&
           same(input_norm_squared_, o.input_norm_squared_);
  }

 private:
  std::vector<ModeEntry> entries_;
  PhysicalContext context_;
  double residual_norm_ = 0.0;
  double input_norm_squared_ = std::numeric_limits<double>::quiet_NaN();
};

/// One row of a dispersion table: a transverse wavenumber or a Landau mode.
struct DispersionRecord {
  std::string label;
  double kappa_or_lambda = 0.0;  // kappa for free components, transverse eigenvalue for Landau modes
  complex kz_exact{};            // Im > 0 marks an evanescent component
  double kz_paraxial = 0.0;
  double phase_error_rate = 0.0;     // |Re kz_exact - kz_paraxial|
  double correction_estimate = 0.0;  // leading-order magnitude of the d^2/dz^2 eigenvalue
  double correction_exact = 0.0;     // (k - Re kz_exact)^2

  bool operator==(const DispersionRecord& o) const {
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return label == o.label && kappa_or_lambda == o.kappa_or_lambda && kz_exact == o.kz_exact &&
           kz_paraxial == o.kz_paraxial && phase_error_rate == o.phase_error_rate &&
           same(correction_estimate, o.correction_estimate) &&
           same(correction_exact, o.correction_exact);
  }
};

}  // namespace xbeam
