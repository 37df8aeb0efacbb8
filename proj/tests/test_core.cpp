#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "xbeam/core.hpp"

using namespace xbeam;

namespace {
const SpinProjection zero = SpinProjection::from_twice(0);
const SpinProjection up_half = SpinProjection::from_twice(1);
}  // namespace

TEST(MakeContext, PythagoreanTriple) {
  const auto ctx = make_context(3.0, 5.0, 0.0, 0.0, SpinTag::spinless, zero);
  EXPECT_EQ(ctx.carrier_k, 4.0);
}

TEST(MakeContext, PhotonCarrierEqualsEnergy) {
  const auto ctx = make_photon_context(2.5);
  EXPECT_EQ(ctx.carrier_k, 2.5);
  EXPECT_EQ(ctx.mass, 0.0);
  EXPECT_EQ(ctx.charge, 0.0);
}

TEST(MakeContext, RejectsEnergyAtOrBelowMass) {
  try {
    make_context(1.0, 1.0, 0.0, 0.0, SpinTag::spinless, zero);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("no propagating carrier"), std::string::npos);
  }
  EXPECT_THROW(make_context(2.0, 1.0, 0.0, 0.0, SpinTag::spinless, zero), std::invalid_argument);
  EXPECT_THROW(make_context(-1.0, 1.0, 0.0, 0.0, SpinTag::spinless, zero), std::invalid_argument);
}

TEST(MakeContext, SpinProjectionMustMatchTag) {
  EXPECT_THROW(make_context(1, 2, 1, 1, SpinTag::spinless, up_half), std::invalid_argument);
  EXPECT_THROW(make_context(1, 2, 1, 1, SpinTag::spin_half, zero), std::invalid_argument);
  EXPECT_THROW(make_context(1, 2, 1, 1, SpinTag::spin_one, up_half), std::invalid_argument);
  EXPECT_NO_THROW(make_context(1, 2, 1, 1, SpinTag::spin_half, -up_half));
  for (int t : {-2, 0, 2})
    EXPECT_NO_THROW(make_context(1, 2, 1, 1, SpinTag::spin_one, SpinProjection::from_twice(t)));
  EXPECT_THROW(make_context(0.5, 2, 0, 0, SpinTag::photon, zero), std::invalid_argument);
  EXPECT_THROW(make_context(0, 2, 1, 0, SpinTag::photon, zero), std::invalid_argument);
}

TEST(SpinProjection, OnlyHalfIntegers) {
  EXPECT_EQ(SpinProjection::from_double(-0.5).twice(), -1);
  EXPECT_EQ(SpinProjection::from_double(1.0).twice(), 2);
  EXPECT_THROW(SpinProjection::from_double(0.3), std::invalid_argument);
}

TEST(MakeContext, InvariantsOnRandomInputs) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double m = u(rng);
    const double e = m + 1e-6 + u(rng);
    const auto ctx = make_context(m, e, 0, 0, SpinTag::spinless, zero);
    EXPECT_GT(ctx.carrier_k, 0.0);
    EXPECT_NEAR(ctx.carrier_k * ctx.carrier_k + m * m, e * e, 8 * std::numeric_limits<double>::epsilon() * e * e);
    // carrier_k strictly increasing in energy at fixed mass
    const auto higher = make_context(m, e * (1 + 1e-9), 0, 0, SpinTag::spinless, zero);
    EXPECT_GT(higher.carrier_k, ctx.carrier_k);
    // pure
    EXPECT_EQ(make_context(m, e, 0, 0, SpinTag::spinless, zero), ctx);
  }
}

TEST(TransverseGrid, RejectsNonPowersOfTwo) {
  EXPECT_THROW(TransverseGrid(48, 64, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(TransverseGrid(64, 64, 0.0, 1.0), std::invalid_argument);
  EXPECT_NO_THROW(TransverseGrid(64, 32, 0.5, 1.0));
}

TEST(TransverseGrid, SpectralLayout) {
  const TransverseGrid g(8, 4, 0.5, 2.0);
  const double base = 2 * std::numbers::pi / (8 * 0.5);
  EXPECT_DOUBLE_EQ(g.kx(0), 0.0);
  EXPECT_DOUBLE_EQ(g.kx(1), base);
  EXPECT_DOUBLE_EQ(g.kx(3), 3 * base);
  EXPECT_DOUBLE_EQ(g.kx(4), -4 * base);  // Nyquist, magnitude pi/dx
  EXPECT_DOUBLE_EQ(std::abs(g.kx(4)), g.nyquist_x());
  EXPECT_DOUBLE_EQ(g.kx(7), -base);
  EXPECT_DOUBLE_EQ(g.x(4), 0.0);
  EXPECT_DOUBLE_EQ(g.x(0), -2.0);
  EXPECT_DOUBLE_EQ(g.y(2), 0.0);
}

TEST(BeamNorm, ZeroEnvelope) {
  const auto ctx = make_photon_context(1.0);
  EXPECT_EQ(beam_norm(BeamState::zeros(TransverseGrid::square(16, 0.1), ctx)), 0.0);
}

TEST(BeamNorm, UnitEnvelopeGivesSideLength) {
  const auto ctx = make_photon_context(1.0);
  const TransverseGrid g = TransverseGrid::square(64, 0.25);  // L = 16
  BeamState s(g, ctx, 0.0, std::vector<complex>(g.size(), complex{1.0, 0.0}));
  EXPECT_NEAR(beam_norm(s), 16.0, 1e-12);
}

TEST(BeamNorm, SampledNormalizedGaussian) {
  // integral of (2/(pi w^2)) exp(-2 r^2 / w^2) over the plane is 1; the sampled
  // trapezoid sum of a well-resolved Gaussian matches it to rounding.
  const auto ctx = make_photon_context(1.0);
  const double w = 2.0;
  const TransverseGrid g = TransverseGrid::square(128, w / 8);
  std::vector<complex> f(g.size());
  const double c = std::sqrt(2.0 / std::numbers::pi) / w;
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      f[g.index(i, j)] = c * std::exp(-(g.x(i) * g.x(i) + g.y(j) * g.y(j)) / (w * w));
  EXPECT_NEAR(beam_norm(BeamState(g, ctx, 0.0, f)), 1.0, 1e-10);
}

TEST(BeamState, NormalizedRecordsOriginalNorm) {
  const auto ctx = make_photon_context(1.0);
  const TransverseGrid g = TransverseGrid::square(8, 1.0);
  BeamState s(g, ctx, 0.0, std::vector<complex>(g.size(), complex{0.0, 2.0}));
  const auto n = s.normalized();
  EXPECT_NEAR(n.norm(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(n.metadata().original_norm, 16.0);
  EXPECT_THROW(BeamState::zeros(g, ctx).normalized(), std::invalid_argument);
  EXPECT_THROW(BeamState(g, ctx, 0.0, std::vector<complex>(3)), std::invalid_argument);
}

TEST(ModeSpectrum, RejectsDuplicates) {
  const auto ctx = make_context(1, 2, 1, 1, SpinTag::spinless, zero);
  EXPECT_THROW(ModeSpectrum({{0, 1, {1, 0}}, {0, 1, {0, 1}}}, ctx, 0.0), std::invalid_argument);
  EXPECT_THROW(ModeSpectrum({{0, 1, {1, 0}}}, ctx, -1.0), std::invalid_argument);
  const ModeSpectrum ok({{0, 1, {3, 0}}, {1, 1, {0, 4}}}, ctx, 0.0);
  EXPECT_DOUBLE_EQ(ok.captured_norm_squared(), 25.0);
  ASSERT_NE(ok.find(1, 1), nullptr);
  EXPECT_EQ(ok.find(2, 1), nullptr);
}
