#include <gtest/gtest.h>

#include <cmath>

#include "qlab/evolve.hpp"
#include "qlab/wavefield.hpp"

using namespace qlab;

namespace {

const PhysicalParams kP(2.0, 3.0);
const double kSigma = 0.8, kXc = 0.3, kK0 = 1.7;

WaveFunction packet(const Grid1D& g) { return gaussian_packet(kXc, kSigma, kK0, kP, g); }

// Q for a Gaussian amplitude exp(-(x-xc)^2 / 4 sigma^2).
double gaussian_q(double x) {
  const double y = x - kXc;
  return kP.hbar * kP.hbar / (2.0 * kP.m) *
         (1.0 / (2.0 * kSigma * kSigma) - y * y / (4.0 * kSigma * kSigma * kSigma * kSigma));
}

}  // namespace

TEST(WaveFunction, PacketIsNormalized) {
  Grid1D g = Grid1D::span(-10.0, 10.0, 2001);
  EXPECT_NEAR(packet(g).norm(), 1.0, 1e-12);
  WaveFunction w(ComplexField(g, cplx(2.0, 0.0)), kP);
  EXPECT_NEAR(w.normalized().norm(), 1.0, 1e-12);
}

TEST(WaveFunction, NonNormalizableRefusesToNormalize) {
  Grid1D g = Grid1D::span(-1.0, 1.0, 11);
  EXPECT_THROW(plane_wave(1.0, 0.0, kP, g).normalized(), Error);
}

TEST(Polar, RoundTripReproducesPsi) {
  Grid1D g = Grid1D::span(-6.0, 6.0, 601);
  WaveFunction psi = packet(g);
  PolarForm pf = to_polar(psi);
  ComplexField back = from_polar(pf);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(std::abs(back[i] - psi.field[i]), 0.0, 1e-13);
}

TEST(Polar, PhaseGradientOfPacket) {
  Grid1D g = Grid1D::span(-6.0, 6.0, 601);
  MaskedField sx = phase_gradient(to_polar(packet(g)));
  for (std::size_t i = 0; i < g.n; ++i)
    if (sx.valid(i)) EXPECT_NEAR(sx[i], kP.hbar * kK0, 1e-8);
}

TEST(Polar, NodesAreMasked) {
  Grid1D g = Grid1D::span(-5.0, 5.0, 1000);  // no sample exactly at x = 0
  PolarForm pf = to_polar(stationary_ho(1, 1.0, kP, g));
  EXPECT_TRUE(pf.node_mask[499] || pf.node_mask[500]);
  MaskedField q = quantum_potential(pf, kP);
  EXPECT_TRUE(q.mask[499] && q.mask[500]);
}

TEST(QuantumPotential, GaussianClosedForm) {
  Grid1D g = Grid1D::span(-6.0, 6.0, 2401);
  WaveFunction psi = packet(g);
  MaskedField qa = quantum_potential(to_polar(psi), kP);
  MaskedField qd = quantum_potential_density(psi.density(), kP);
  for (std::size_t i = 1; i + 1 < g.n; ++i) {
    if (!qa.valid(i)) continue;
    const double scale = 1.0 + std::abs(gaussian_q(g.x(i)));
    EXPECT_NEAR(qa[i], gaussian_q(g.x(i)), 1e-4 * scale);
    EXPECT_NEAR(qd[i], gaussian_q(g.x(i)), 1e-4 * scale);
  }
}

TEST(QuantumPotential, InvariantUnderGlobalPhaseAndScale) {
  Grid1D g = Grid1D::span(-6.0, 6.0, 601);
  WaveFunction psi = packet(g);
  WaveFunction twisted = psi;
  for (cplx& z : twisted.field.values) z *= 3.0 * std::polar(1.0, 0.9);
  MaskedField a = quantum_potential(to_polar(psi), kP);
  MaskedField b = quantum_potential(to_polar(twisted), kP);
  for (std::size_t i = 0; i < g.n; ++i)
    if (a.valid(i) && b.valid(i)) EXPECT_NEAR(a[i], b[i], 1e-9 * (1.0 + std::abs(a[i])));
}

TEST(Transport, OsmoticVelocityAndCurrent) {
  Grid1D g = Grid1D::span(-6.0, 6.0, 1201);
  WaveFunction psi = packet(g);
  MaskedField u = osmotic_velocity(psi.density(), kP);
  MaskedField j = probability_current(to_polar(psi), kP);
  RealField rho = psi.density();
  for (std::size_t i = 1; i + 1 < g.n; ++i) {
    const double y = g.x(i) - kXc;
    EXPECT_NEAR(u[i], -kP.diffusion() * y / (kSigma * kSigma), 1e-8);
    if (j.valid(i)) EXPECT_NEAR(j[i], rho[i] * kP.hbar * kK0 / kP.m, 1e-9);
  }
}

TEST(Transport, MomentumFluctuationVarianceOfGaussian) {
  Grid1D g = Grid1D::span(-6.0, 6.0, 1201);
  MaskedField v = momentum_fluctuation_variance(packet(g).density(), kP);
  for (std::size_t i = 0; i < g.n; ++i)
    if (v.valid(i)) EXPECT_NEAR(v[i], kP.hbar * kP.hbar / (4.0 * kSigma * kSigma), 1e-8);
}

TEST(Masks, FillMaskedInterpolatesLinearly) {
  Grid1D g = Grid1D::span(0.0, 7.0, 8);
  MaskedField f{RealField(g, std::vector<double>{99.0, 0.0, 99.0, 99.0, 3.0, -1.0, 99.0, 99.0}),
                Mask{true, false, true, true, false, false, true, true}};
  RealField r = fill_masked(f);
  EXPECT_DOUBLE_EQ(r[0], 0.0);
  EXPECT_DOUBLE_EQ(r[2], 1.0);
  EXPECT_DOUBLE_EQ(r[3], 2.0);
  EXPECT_DOUBLE_EQ(r[7], -1.0);
  EXPECT_DOUBLE_EQ(max_abs(f), 3.0);
}

TEST(Masks, DensityMaskIsRelative) {
  Grid1D g = Grid1D::span(0.0, 7.0, 8);
  RealField rho(g, std::vector<double>{1e-20, 1.0, 1e-5, 1.0, 1.0, 1.0, 1.0, 1.0});
  Mask m = density_mask(rho, 1e-8);
  EXPECT_TRUE(m[0]);
  EXPECT_FALSE(m[1]);
  EXPECT_FALSE(m[2]);
}
