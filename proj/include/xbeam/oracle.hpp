#pragma once

/// \file
/// Brute-force validators kept independent of the spectral machinery:
///
///  * a finite-difference radial eigensolver for the magnetic transverse
///    operator, used to certify the analytic Landau eigenvalues;
///  * direct summation of a finite plane-wave superposition, used to certify
///    the FFT propagators.

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "xbeam/core.hpp"

namespace xbeam::oracle {

inline constexpr int min_radial_points = 512;
inline constexpr double richardson_limit = 1e-4;

class ResolutionError : public std::runtime_error {
 public:
  ResolutionError(double disagreement)
      : std::runtime_error("finite-difference spectrum not resolved: refinement step changed an "
                           "eigenvalue by " + std::to_string(disagreement)),
        disagreement_(disagreement) {}
  double disagreement() const { return disagreement_; }

 private:
  double disagreement_;
};

/// Largest `count` eigenvalues (descending) of
///   R'' + R'/r - l^2/r^2 R + (eB l - (eB)^2 r^2 / 4 + 2 eB s_z) R
/// on r in [0, r_max] with R(r_max) = 0, discretized at cell centres
/// r_i = (i - 1/2) h with the conservative form (1/r)(r R')' and symmetrized
/// through u_i = sqrt(r_i) R_i. Second order in h, no boundary row at r = 0.
inline std::vector<double> fd_landau_eigenvalues(int l, double s_z, double eB, double r_max,
                                                 int n_points, int count) {
  if (n_points < 2 || count < 1 || count > n_points)
    throw std::invalid_argument("invalid finite-difference sizes");
  const double h = r_max / (n_points + 0.5);
  std::vector<double> diag(n_points), off(n_points > 1 ? n_points - 1 : 1);
  const double l2 = static_cast<double>(l) * l;
  const double shift = eB * l + 2.0 * eB * s_z;
  for (int i = 0; i < n_points; ++i) {
    const double r = (i + 0.5) * h;
    const double r_lo = i * h;  // r_{i-1/2}; zero for the first cell
    const double r_hi = (i + 1) * h;
    diag[i] = -(r_lo + r_hi) / (r * h * h) - l2 / (r * r) - 0.25 * eB * eB * r * r + shift;
    if (i + 1 < n_points) {
      const double r_next = (i + 1.5) * h;
      off[i] = r_hi / (h * h * std::sqrt(r * r_next));
    }
  }

  std::vector<double> w(n_points), z(1);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n_points));
  lapack_int found = 0;
  const lapack_int il = n_points - count + 1, iu = n_points;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', n_points, diag.data(), off.data(),
                                         0.0, 0.0, il, iu, 0.0, &found, w.data(), z.data(), 1,
                                         isuppz.data());
  if (info != 0 || found != count)
    throw std::runtime_error("tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
  std::vector<double> out(w.begin(), w.begin() + count);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

struct FdSpectrum {
  std::vector<double> eigenvalues;  // Richardson-extrapolated, descending
  std::vector<double> coarse;       // n_points
  std::vector<double> fine;         // 2 n_points
  double max_step = 0.0;            // max |fine - coarse|
};

/// Leading `count` eigenvalues for one (l, s_z) channel, extrapolated from
/// n_points and 2 n_points. Rejects unresolved spectra and windows that do
/// not cover the magnetic length scale.
inline FdSpectrum fd_landau_spectrum(int l, SpinProjection s_z, const PhysicalContext& ctx,
                                     double r_max, int n_points, int count = 5) {
  const double eB = ctx.eB();
  if (eB == 0.0) throw std::invalid_argument("no Landau structure: charge * b_field = 0");
  if (n_points < min_radial_points)
    throw std::invalid_argument("finite-difference oracle needs at least 512 radial points");
  const double w_b = 2.0 / std::sqrt(std::abs(eB));
  if (r_max < 3.0 * w_b * std::sqrt(count + std::abs(l) + 1.0))
    throw std::invalid_argument("r_max does not cover the requested Landau levels");

  FdSpectrum s;
  s.coarse = fd_landau_eigenvalues(l, s_z.value(), eB, r_max, n_points, count);
  s.fine = fd_landau_eigenvalues(l, s_z.value(), eB, r_max, 2 * n_points, count);
  s.eigenvalues.resize(count);
  for (int i = 0; i < count; ++i) {
    s.max_step = std::max(s.max_step, std::abs(s.fine[i] - s.coarse[i]));
    s.eigenvalues[i] = (4.0 * s.fine[i] - s.coarse[i]) / 3.0;
  }
  if (s.max_step > richardson_limit) throw ResolutionError(s.max_step);
  return s;
}

/// Observed convergence order log2(|e(n) - e(2n)| / |e(2n) - e(4n)|) per eigenvalue.
inline std::vector<double> fd_convergence_order(int l, double s_z, double eB, double r_max,
                                                int n_points, int count) {
  const auto a = fd_landau_eigenvalues(l, s_z, eB, r_max, n_points, count);
  const auto b = fd_landau_eigenvalues(l, s_z, eB, r_max, 2 * n_points, count);
  const auto c = fd_landau_eigenvalues(l, s_z, eB, r_max, 4 * n_points, count);
  std::vector<double> order(count);
  for (int i = 0; i < count; ++i) order[i] = std::log2(std::abs(a[i] - b[i]) / std::abs(b[i] - c[i]));
  return order;
}

struct PlaneWave {
  double kx = 0.0;
  double ky = 0.0;
  complex amplitude{};
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class Dispersion { exact, paraxial };

/// sum_j a_j exp(i (kappa_j . r + (kz(kappa_j) - k) z)) at each point, by
/// direct summation in the listed component order.
inline std::vector<complex> direct_field_at(const std::vector<Point>& points,
                                            const std::vector<PlaneWave>& components, double z,
                                            Dispersion variant, double k) {
  const complex I{0.0, 1.0};
  std::vector<complex> phase(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    const double kappa2 = components[c].kx * components[c].kx + components[c].ky * components[c].ky;
    const complex kz = variant == Dispersion::exact ? std::sqrt(complex{k * k - kappa2, 0.0})
                                                    : complex{k - kappa2 / (2.0 * k), 0.0};
    phase[c] = std::exp(I * (kz - k) * z);
  }
  std::vector<complex> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    complex sum{};
    for (std::size_t c = 0; c < components.size(); ++c) {
      const auto& w = components[c];
      sum += w.amplitude * phase[c] * std::exp(I * (w.kx * points[p].x + w.ky * points[p].y));
    }
    out[p] = sum;
  }
  return out;
}

}  // namespace xbeam::oracle
