#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "xbeam/modes.hpp"
#include "xbeam/propagation.hpp"

using namespace xbeam;
using namespace xbeam::propagation;
using modes::ModeRequest;

namespace {
const complex I{0.0, 1.0};

double max_abs_diff(const std::vector<complex>& a, const std::vector<complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<complex>& a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Plane wave exp(i (kx x + ky y)) with lattice wavenumbers (mx, my).
BeamState lattice_wave(const TransverseGrid& g, const PhysicalContext& ctx, int mx, int my) {
  const double kx = 2 * std::numbers::pi * mx / g.extent_x(), ky = 2 * std::numbers::pi * my / g.extent_y();
  std::vector<complex> f(g.size());
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) f[g.index(i, j)] = std::exp(I * (kx * g.x(i) + ky * g.y(j)));
  return BeamState(g, ctx, 0.0, f);
}

PhysicalContext magnetic(double k = 10.0, double eB = 2.0) {
  return make_context(0.0, k, 1.0, eB, SpinTag::spinless, SpinProjection{});
}

TransverseGrid landau_grid() { return TransverseGrid::square(128, std::sqrt(2.0) / 8); }
}  // namespace

TEST(PropagateFree, OnAxisPlaneWaveUnchanged) {
  const auto g = TransverseGrid::square(32, 0.5);
  const auto s = lattice_wave(g, make_photon_context(1.0), 0, 0);
  for (double dz : {-40.0, 0.3, 1e4})
    for (auto v : {Variant::exact, Variant::paraxial}) {
      const auto out = propagate_free(s, dz, v);
      EXPECT_LT(max_abs_diff(out.envelope(), s.envelope()), 1e-13);
      EXPECT_EQ(out.z(), dz);
    }
}

TEST(PropagateFree, OffAxisPhaseAdvance) {
  // kappa = 0.6 exactly on the lattice: L = 2 pi m / 0.6 with m = 6 gives L = 20 pi.
  const TransverseGrid g = TransverseGrid::square(64, 20 * std::numbers::pi / 64);
  const auto s = lattice_wave(g, make_photon_context(1.0), 6, 0);
  ASSERT_NEAR(2 * std::numbers::pi * 6 / g.extent_x(), 0.6, 1e-15);
  const auto ex = propagate_free(s, 1.0, Variant::exact);
  const auto px = propagate_free(s, 1.0, Variant::paraxial);
  for (std::size_t q = 0; q < g.size(); q += 97) {
    EXPECT_NEAR(std::arg(ex.envelope()[q] / s.envelope()[q]), -0.2, 1e-12);
    EXPECT_NEAR(std::arg(px.envelope()[q] / s.envelope()[q]), -0.18, 1e-12);
  }
}

TEST(PropagateFree, ParaxialGaussianMatchesClosedFormAtRayleighRange) {
  const auto ctx = make_photon_context(1.0);
  const double w0 = 10.0, zr = w0 * w0 / 2;
  const auto g = TransverseGrid::square(256, w0 / 8);
  const auto s0 = modes::generate(ModeRequest::gaussian(w0), g, ctx);
  const auto s1 = propagate_free(s0, zr, Variant::paraxial);
  const double w = std::sqrt(2.0) * observables(s1).rms_radius;
  EXPECT_NEAR(w / (w0 * std::sqrt(2.0)), 1.0, 1e-6);
  const auto closed = modes::generate(ModeRequest::gaussian(w0), g, ctx, zr);
  EXPECT_LT(max_abs_diff(s1.envelope(), closed.envelope()), 1e-10);
}

TEST(PropagateFree, NormConservedAndSemigroup) {
  const auto ctx = make_photon_context(10.0);  // corner of the spectrum, sqrt(2) pi / dx, stays below k
  const auto g = TransverseGrid::square(128, 0.5);
  const auto s = modes::generate(ModeRequest::laguerre_gauss(4.0, 1, 2), g, ctx);
  for (auto v : {Variant::exact, Variant::paraxial}) {
    const auto a = propagate_free(propagate_free(s, 3.0, v), 4.5, v);
    const auto b = propagate_free(s, 7.5, v);
    EXPECT_LT(max_abs_diff(a.envelope(), b.envelope()), 1e-12);
    EXPECT_NEAR(b.norm(), s.norm(), 1e-12);
    EXPECT_EQ(b.metadata().lost_norm, 0.0);
    const auto back = propagate_free(b, -7.5, v);
    EXPECT_LT(max_abs_diff(back.envelope(), s.envelope()), 1e-12);
  }
}

TEST(PropagateFree, EvanescentContentDampsAndBlocksReverse) {
  const auto ctx = make_photon_context(1.0);
  const auto g = TransverseGrid::square(32, 1.0);  // Nyquist pi > k
  std::vector<complex> f(g.size());
  const auto wave = lattice_wave(g, ctx, 8, 0);  // kappa = pi / 2 > 1
  const auto carrier = lattice_wave(g, ctx, 0, 0);
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = carrier.envelope()[q] + 0.5 * wave.envelope()[q];
  const BeamState s(g, ctx, 0.0, f);
  const auto out = propagate_free(s, 2.0, Variant::exact);
  const double decay = std::exp(-2.0 * std::sqrt(std::pow(std::numbers::pi / 2, 2) - 1.0));
  const double lost = 0.25 * g.extent_x() * g.extent_y() * (1 - decay * decay);
  EXPECT_NEAR(out.metadata().lost_norm, lost, 1e-10);
  EXPECT_NEAR(out.norm_squared() + out.metadata().lost_norm, s.norm_squared(), 1e-9);
  EXPECT_THROW(propagate_free(s, -1.0, Variant::exact), EvanescentContentError);
  EXPECT_NO_THROW(propagate_free(s, -1.0, Variant::paraxial));
  EXPECT_NO_THROW(propagate_free(carrier, -1.0, Variant::exact));
}

TEST(PropagateFree, BackwardStepDropsResidualEvanescentContent) {
  const auto ctx = make_photon_context(1.0);
  const auto g = TransverseGrid::square(32, 1.0);
  const auto carrier = lattice_wave(g, ctx, 1, 0);
  const auto noise = lattice_wave(g, ctx, 12, 3);  // kappa ~ 2.4, far past k
  std::vector<complex> f(g.size());
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = carrier.envelope()[q] + 1e-8 * noise.envelope()[q];
  const BeamState s(g, ctx, 0.0, f);
  const auto back = propagate_free(s, -200.0, Variant::exact);
  const auto clean = propagate_free(carrier, -200.0, Variant::exact);
  EXPECT_LT(max_abs_diff(back.envelope(), clean.envelope()), 1e-12);
  EXPECT_NEAR(back.metadata().lost_norm, 1e-16 * g.extent_x() * g.extent_y(), 1e-20);
}

TEST(PropagateFree, PhaseLagRateOfSingleComponent) {
  const TransverseGrid g = TransverseGrid::square(64, 20 * std::numbers::pi / 64);
  const auto s = lattice_wave(g, make_photon_context(1.0), 2, 0);  // kappa = 0.2
  const double kappa = 0.2;
  const double lag = mean_paraxial_phase_lag(s);
  EXPECT_NEAR(lag / (std::pow(kappa, 4) / 8.0), 1.0, kappa * kappa);
  EXPECT_NEAR(lag, dispersion::paraxial_phase_lag(kappa, 1.0), 1e-15);
}

TEST(Observables, Examples) {
  const auto ctx = make_photon_context(1.0);
  const auto g = TransverseGrid::square(128, 0.25);
  const double w0 = 3.0;
  const auto o = observables(modes::generate(ModeRequest::gaussian(w0), g, ctx));
  EXPECT_NEAR(o.centroid_x, 0.0, 1e-10);
  EXPECT_NEAR(o.centroid_y, 0.0, 1e-10);
  EXPECT_NEAR(o.rms_radius, w0 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(o.norm, 1.0, 1e-10);
  EXPECT_NEAR(observables(modes::generate(ModeRequest::laguerre_gauss(w0, 0, 3), g, ctx)).oam_mean, 3.0, 1e-8);
  EXPECT_THROW(observables(BeamState::zeros(g, ctx)), std::invalid_argument);
}

TEST(PropagateMagnetic, SingleModeIntensityIsInvariant) {
  const auto ctx = magnetic();
  const auto g = landau_grid();
  const auto s = modes::generate(ModeRequest::landau(1, -2), g, ctx);
  const MagneticPropagator prop(g, ctx, {3, -3, 3, 1e-10});
  for (double dz : {0.7, 13.0, -250.0})
    for (auto v : {Variant::exact, Variant::paraxial}) {
      const auto out = prop(s, dz, v);
      double drift = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q)
        drift = std::max(drift, std::abs(std::abs(out.envelope()[q]) - std::abs(s.envelope()[q])));
      EXPECT_LT(drift, 1e-8);
      EXPECT_LT(out.metadata().truncation_residual, 1e-10);
    }
}

TEST(PropagateMagnetic, MatchesGeneratedEigenphase) {
  const auto ctx = magnetic();
  const auto g = landau_grid();
  const auto s = modes::generate(ModeRequest::landau(0, 1), g, ctx);
  const auto out = propagate_magnetic(s, 5.0, Variant::exact, {2, -2, 2, 1e-10});
  EXPECT_LT(max_abs_diff(out.envelope(), modes::generate(ModeRequest::landau(0, 1), g, ctx, 5.0).envelope()), 1e-10);
}

TEST(PropagateMagnetic, TwoModeBeatPeriod) {
  const auto ctx = magnetic();
  const auto g = landau_grid();
  const auto a = modes::generate(ModeRequest::landau(0, 0), g, ctx), b = modes::generate(ModeRequest::landau(1, 0), g, ctx);
  std::vector<complex> f(g.size());
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = (a.envelope()[q] + b.envelope()[q]) / std::sqrt(2.0);
  const BeamState s(g, ctx, 0.0, f);
  const double k1 = std::sqrt(100.0 - 2.0), k2 = std::sqrt(100.0 - 6.0);
  const double period = 2 * std::numbers::pi / std::abs(k1 - k2);
  const MagneticPropagator prop(g, ctx, {2, -1, 1, 1e-10});
  const auto after = prop(s, period, Variant::exact);
  double drift = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q)
    drift = std::max(drift, std::abs(std::norm(after.envelope()[q]) - std::norm(s.envelope()[q])));
  EXPECT_LT(drift / std::pow(max_abs(s.envelope()), 2), 1e-8);
  const auto half = prop(s, period / 2, Variant::exact);
  EXPECT_GT(std::abs(observables(half).rms_radius - observables(s).rms_radius), 1e-3);
}

TEST(PropagateMagnetic, CoefficientModuliPreserved) {
  const auto ctx = magnetic(4.0);
  std::vector<ModeEntry> entries;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int n = 0; n <= 1; ++n)
    for (int l = -1; l <= 1; ++l) entries.push_back({n, l, {n01(rng), n01(rng)}});
  const ModeSpectrum spec(entries, ctx, 0.0);
  const auto out = evolve_spectrum(spec, 37.0, Variant::exact);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double lambda = dispersion::landau_transverse_eigenvalue({entries[i].n, entries[i].l, ctx.s_z}, ctx);
    ASSERT_GT(16.0 + lambda, 0.0);
    EXPECT_NEAR(std::abs(out.entries()[i].coefficient), std::abs(entries[i].coefficient), 1e-14);
  }
}

TEST(PropagateMagnetic, SemigroupAndNorm) {
  const auto ctx = magnetic();
  const auto g = landau_grid();
  const auto a = modes::generate(ModeRequest::landau(0, 2), g, ctx), b = modes::generate(ModeRequest::landau(2, -1), g, ctx);
  std::vector<complex> f(g.size());
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = 0.8 * a.envelope()[q] + complex{0, 0.6} * b.envelope()[q];
  const BeamState s(g, ctx, 0.0, f);
  const MagneticPropagator prop(g, ctx, {3, -3, 3, 1e-10});
  for (auto v : {Variant::exact, Variant::paraxial}) {
    const auto two = prop(prop(s, 1.5, v), 1.5, v);
    const auto one = prop(s, 3.0, v);
    EXPECT_LT(max_abs_diff(two.envelope(), one.envelope()), 1e-12);
    EXPECT_NEAR(one.norm(), s.norm(), 1e-12);
  }
}

TEST(PropagateMagnetic, VariantDistanceScalesAsLambdaSquaredOverKCubed) {
  // Single mode: distance = 2 |sin(delta z / 2)| with delta ~ lambda^2 / (8 k^3).
  const auto g = landau_grid();
  std::vector<double> logk, logd;
  for (double k : {20.0, 40.0, 80.0, 160.0}) {
    const auto ctx = magnetic(k);
    const auto s = modes::generate(ModeRequest::landau(1, 1), g, ctx);
    const auto rep = compare_variants(s, {1.0}, {2, 0, 2, 1e-10});
    logk.push_back(std::log(k));
    logd.push_back(std::log(rep.rows[0].l2_distance));
  }
  for (std::size_t i = 0; i + 1 < logk.size(); ++i)
    EXPECT_NEAR((logd[i + 1] - logd[i]) / (logk[i + 1] - logk[i]), -3.0, 0.05);
}

TEST(PropagateMagnetic, Errors) {
  const auto ctx = magnetic();
  const auto g = landau_grid();
  auto req = ModeRequest::gaussian(1.0);
  req.center_x = 2.0;
  const auto off = modes::generate(req, g, ctx);
  try {
    propagate_magnetic(off, 1.0, Variant::exact, {1, -1, 1, 1e-10});
    FAIL() << "expected truncation error";
  } catch (const TruncationError& e) {
    EXPECT_GT(e.residual(), 1e-10);
  }
  EXPECT_THROW(propagate_magnetic(modes::generate(ModeRequest::gaussian(2.0), g, make_photon_context(1.0)), 1.0, Variant::exact),
               std::invalid_argument);
  // k = 1: (1, 0) has lambda = -6 < -k^2, so it decays forward and cannot be undone.
  const auto slow = magnetic(1.0);
  const ModeSpectrum spec({{1, 0, {1, 0}}}, slow, 0.0);
  EXPECT_LT(std::abs(evolve_spectrum(spec, 1.0, Variant::exact).entries()[0].coefficient), 1.0);
  EXPECT_THROW(evolve_spectrum(spec, -1.0, Variant::exact), EvanescentContentError);
}

TEST(CompareVariants, MonochromaticDistance) {
  const TransverseGrid g = TransverseGrid::square(64, 20 * std::numbers::pi / 64);
  const auto s = lattice_wave(g, make_photon_context(1.0), 6, 0).normalized();
  const double delta = 0.82 - 0.8;
  const auto rep = compare_variants(s, {0.0, 1.0, 50.0, 157.0});
  for (const auto& row : rep.rows)
    EXPECT_NEAR(row.l2_distance, 2 * std::abs(std::sin(delta * row.z / 2)), 1e-12) << row.z;
  EXPECT_EQ(rep.rows[0].l2_distance, 0.0);
  EXPECT_NEAR(rep.rows[1].phase_error, -delta, 1e-12);
}

TEST(CompareVariants, GaussianRateRatioFollowsKappaFourth) {
  // Oracle: radial quadrature of <kappa^4> / (8 k^3) over |Psi_hat|^2 ~ exp(-kappa^2 w^2 / 2),
  // truncated at kappa = k, including the exact lag.
  auto quadrature = [](double k, double w) {
    double num = 0.0, den = 0.0;
    const int n = 200000;
    const double h = k / n;
    for (int i = 0; i < n; ++i) {
      const double kappa = (i + 0.5) * h;
      const double p = kappa * std::exp(-kappa * kappa * w * w / 2);
      num += p * dispersion::paraxial_phase_lag(kappa, k);
      den += p;
    }
    return num / den;
  };
  const double k = 1.0;
  std::vector<double> rates;
  for (double w : {10.0, 20.0}) {
    const auto g = TransverseGrid::square(256, w / 8);
    const auto s = modes::generate(ModeRequest::gaussian(w), g, make_photon_context(k));
    const double rate = mean_paraxial_phase_lag(s);
    EXPECT_NEAR(rate / quadrature(k, w), 1.0, 1e-6) << w;
    EXPECT_NEAR(rate * std::pow(k, 3) * std::pow(w, 4), 1.0, 4.0 / (k * k * w * w)) << w;
    rates.push_back(rate);
  }
  EXPECT_NEAR(rates[0] / rates[1], 16.0, 16.0 * 0.1);
  EXPECT_NEAR(rates[0] / rates[1], quadrature(k, 10.0) / quadrature(k, 20.0), 1e-5);
}
