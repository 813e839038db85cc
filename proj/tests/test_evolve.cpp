#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qlab/evolve.hpp"

using namespace qlab;

namespace {

double variance(const WaveFunction& psi) {
  RealField rho = psi.density();
  const Grid1D& g = psi.grid();
  double n = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    n += rho[i];
    m1 += rho[i] * g.x(i);
    m2 += rho[i] * g.x(i) * g.x(i);
  }
  m1 /= n;
  return m2 / n - m1 * m1;
}

}  // namespace

TEST(CrankNicolson, ConservesNorm) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-15.0, 15.0, 1201);
  WaveFunction psi = gaussian_packet(1.5, 0.9, 0.5, p, g);
  EvolutionRecord rec = propagate_cn(psi, harmonic_potential(g, 1.0, p), 0.01, 400, 20);
  ASSERT_EQ(rec.size(), 21u);
  const double n0 = rec.snapshots.front().psi.norm();
  for (const Snapshot& s : rec.snapshots) EXPECT_NEAR(s.psi.norm(), n0, 1e-10);
  EXPECT_NEAR(rec.dt, 0.2, 1e-15);
}

TEST(CrankNicolson, FreeGaussianSpreadsAnalytically) {
  PhysicalParams p(1.0, 2.0);
  const double sigma = 0.7;
  Grid1D g = Grid1D::span(-25.0, 25.0, 2501);
  EvolutionRecord rec = propagate_cn(gaussian_packet(0.0, sigma, 0.0, p, g), zero_potential(g), 0.005, 400, 400);
  const double t = rec.snapshots.back().t;
  const double s = p.hbar * t / (2.0 * p.m * sigma * sigma);
  EXPECT_NEAR(variance(rec.snapshots.back().psi), sigma * sigma * (1.0 + s * s), 1e-3);
}

TEST(CrankNicolson, StationaryStateOnlyRotates) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-8.0, 8.0, 1601);
  WaveFunction psi = stationary_ho(2, 1.0, p, g);
  EvolutionRecord rec = propagate_cn(psi, harmonic_potential(g, 1.0, p), 0.01, 100, 100);
  RealField a = psi.density(), b = rec.snapshots.back().psi.density();
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(a[i], b[i], 1e-4);
}

TEST(Oscillator, EigenstatesAreOrthonormal) {
  PhysicalParams p(1.0, 1.5);
  Grid1D g = Grid1D::span(-10.0, 10.0, 2001);
  std::vector<WaveFunction> s;
  for (int n = 0; n < 5; ++n) s.push_back(stationary_ho(n, 1.3, p, g));
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      RealField re(g);
      for (std::size_t i = 0; i < g.n; ++i) re[i] = std::real(std::conj(s[a].field[i]) * s[b].field[i]);
      EXPECT_NEAR(integrate(re), a == b ? 1.0 : 0.0, 1e-10);
    }
}

TEST(Oscillator, TimeFactorIsEnergyPhase) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-5.0, 5.0, 101);
  WaveFunction a = stationary_ho(1, 2.0, p, g), b = stationary_ho_at(1, 2.0, p, g, 0.4);
  const cplx ph = std::polar(1.0, -3.0 * 0.4);  // E = 1.5 hbar omega
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(std::abs(b.field[i] - ph * a.field[i]), 0.0, 1e-14);
}

TEST(Madelung, ExactRecordsSatisfyFluidEquations) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-3.0, 3.0, 1201);
  // free Gaussian with sigma = 1, exact at every t
  EvolutionRecord rec = analytic_record(g, p, 0.1, 0.002, 5, [](double x, double t) {
    const cplx w = cplx(1.0, 0.5 * t);
    return std::pow(2.0 * std::numbers::pi, -0.25) / std::sqrt(w) * std::exp(-x * x / (4.0 * w));
  });
  MadelungResiduals mr = madelung_residuals(rec, zero_potential(g));
  EXPECT_LT(mr.max_hj, 1e-3);
  EXPECT_LT(mr.max_cont, 1e-3);
  EulerResidual er = euler_residual(rec, zero_potential(g));
  EXPECT_LT(er.max_abs, 1e-2);
}

TEST(Pressure, GaussianPressureIsPositiveNearCentre) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-6.0, 6.0, 601);
  RealField P = pressure_field(to_polar(gaussian_packet(0.0, 1.0, 0.0, p, g)), p);
  EXPECT_GT(P[300], 0.0);
}
