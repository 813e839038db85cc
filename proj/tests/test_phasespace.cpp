#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qlab/evolve.hpp"
#include "qlab/phasespace.hpp"

using namespace qlab;

namespace {

const double kSigma = 0.7, kK0 = 0.9;

// Wigner function of gaussian_packet(0, kSigma, kK0) for hbar = 1.
double gaussian_wigner(double x, double p) {
  const double dp = p - kK0;
  return std::exp(-x * x / (2.0 * kSigma * kSigma) - 2.0 * kSigma * kSigma * dp * dp) / std::numbers::pi;
}

RealField normal_density(const Grid1D& g, double s) {
  return RealField::sample(g, [s](double x) {
    return std::exp(-x * x / (2.0 * s * s)) / std::sqrt(2.0 * std::numbers::pi * s * s);
  });
}

}  // namespace

TEST(Wigner, GaussianMoments) {
  Grid1D gx = Grid1D::span(-5.0, 5.0, 201), gp = Grid1D::span(-6.0, 8.0, 701);
  PhaseSpaceDistribution F = PhaseSpaceDistribution::sample(gx, gp, gaussian_wigner);
  EXPECT_NEAR(F.total(), 1.0, 1e-8);
  Moments m = moments(F);
  for (std::size_t i = 0; i < gx.n; i += 20) {
    const double rho = std::exp(-gx.x(i) * gx.x(i) / (2.0 * kSigma * kSigma)) / std::sqrt(2.0 * std::numbers::pi * kSigma * kSigma);
    EXPECT_NEAR(m.rho[i], rho, 1e-10);
    if (m.p.valid(i)) EXPECT_NEAR(m.p[i], kK0, 1e-8);
    EXPECT_NEAR(m.M2[i], rho * (kK0 * kK0 + 0.25 / (kSigma * kSigma)), 1e-8);
  }
}

TEST(Wigner, CharacteristicFunctionMatchesPsi) {
  PhysicalParams p;
  Grid1D gx = Grid1D::span(-5.0, 5.0, 1001), gp = Grid1D::span(-6.0, 8.0, 1401);
  PhaseSpaceDistribution F = PhaseSpaceDistribution::sample(gx, gp, gaussian_wigner);
  WaveFunction psi = gaussian_packet(0.0, kSigma, kK0, p, gx);
  const std::vector<double> deltas{0.0, 0.2, 0.5, 1.0};
  for (double x : {-0.5, 0.0, 0.8}) {
    CharacteristicFunction a = wigner_moyal(F, x, deltas, p.hbar);
    CharacteristicFunction b = zq_from_psi(psi, x, deltas);
    for (std::size_t k = 0; k < deltas.size(); ++k) EXPECT_NEAR(std::abs(a.value[k] - b.value[k]), 0.0, 1e-6);
  }
}

TEST(Wigner, SecondMomentFromCharacteristicFunction) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-5.0, 5.0, 1001);
  WaveFunction psi = gaussian_packet(0.0, kSigma, kK0, p, g);
  MaskedField m2 = m2_from_zq(psi);
  RealField rho = psi.density();
  for (std::size_t i = 200; i <= 800; i += 50)
    if (m2.valid(i)) EXPECT_NEAR(m2[i], rho[i] * (kK0 * kK0 + 0.25 / (kSigma * kSigma)), 5e-4 * rho[i]);
}

TEST(Wigner, LogCurvatureOfGaussian) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-6.0, 6.0, 1201);
  LogCurvature lc = log_zq_curvature(gaussian_packet(0.0, kSigma, kK0, p, g), 0.3);
  EXPECT_NEAR(lc.extrapolated, -0.25 / (kSigma * kSigma), 1e-6);
  EXPECT_NEAR(lc.target, -0.25 / (kSigma * kSigma), 1e-6);
}

TEST(Fluctuations, GaussianSaturatesProduct) {
  PhysicalParams p(1.5, 1.0);
  Grid1D g = Grid1D::span(-5.0, 5.0, 1001);
  FluctuationReport fr = fluctuation_suite(normal_density(g, kSigma), p);
  for (std::size_t i = 0; i < g.n; i += 100) {
    if (!fr.dx2.valid(i)) continue;
    EXPECT_NEAR(fr.gamma[i], 0.5 / (kSigma * kSigma), 1e-8);
    EXPECT_NEAR(fr.dx2[i], kSigma * kSigma, 1e-8);
    EXPECT_NEAR(fr.dp2[i], p.hbar * p.hbar / (4.0 * kSigma * kSigma), 1e-8);
  }
  EXPECT_LT(fr.product_residual, 1e-12);
  EXPECT_EQ(fr.degenerate, 0u);
}

TEST(Fluctuations, NegativeDensityRejected) {
  Grid1D g = Grid1D::span(0.0, 1.0, 11);
  RealField rho(g, 1.0);
  rho[3] = -0.1;
  EXPECT_THROW(fluctuation_suite(rho, PhysicalParams{}), Error);
}

TEST(Fisher, GaussianBoundIsTight) {
  Grid1D g = Grid1D::span(-8.0, 8.0, 3201);
  FisherReport fr = fisher_information(normal_density(g, 1.3));
  EXPECT_NEAR(fr.fisher, 1.0 / (1.3 * 1.3), 1e-6);
  EXPECT_NEAR(fr.variance, 1.3 * 1.3, 1e-6);
  EXPECT_NEAR(fr.cramer_rao, 1.0, 1e-6);
}

TEST(Uncertainty, ChirpedGaussianSaturatesRobertson) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-12.0, 12.0, 2401);
  const double b = 0.6;
  ComplexField f = ComplexField::sample(g, [&](double x) {
    return std::exp(-x * x / (4.0 * kSigma * kSigma)) * std::polar(1.0, 0.5 * b * x * x);
  });
  WaveFunction psi = WaveFunction(f, p).normalized();
  UncertaintyReport u = exact_uncertainty(psi);
  EXPECT_NEAR(u.dx2, kSigma * kSigma, 1e-8);
  EXPECT_NEAR(u.covariance, b * kSigma * kSigma, 1e-6);
  EXPECT_NEAR(u.robertson_margin, 0.0, 1e-6);
  EXPECT_NEAR(u.dp2, u.dp2_q, 1e-6);
  EXPECT_GT(u.heisenberg, 0.5 - 1e-9);
}

TEST(Generators, StaticGaussianSplit) {
  PhysicalParams p(1.0, 2.0);
  Grid1D g = Grid1D::span(-8.0, 8.0, 1601);
  RealField rho = normal_density(g, 1.0);
  GeneratorPair gp = generators(rho, RealField(g, 0.0), p);
  const double U = p.hbar * p.hbar / (2.0 * p.m) / 4.0;  // int ((sqrt rho)')^2 = 1 / (4 sigma^2)
  EXPECT_NEAR(gp.H, U, 1e-8);
  EXPECT_NEAR(gp.K, -U, 1e-8);
}

TEST(Dilation, ZeroAngleIsIdentity) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-8.0, 8.0, 801);
  RealField rho = normal_density(g, 1.0);
  RealField S = RealField::sample(g, [](double x) { return 0.3 * x * x; });
  DilationResult d = dilation_transform(rho, S, 0.0, p);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(d.rho[i], rho[i], 1e-13 * rho[i]);
  EXPECT_LT(d.deviation, 1e-14);
}

TEST(Dilation, GeneratorsRotateHyperbolically) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-12.0, 12.0, 2401);
  RealField rho = normal_density(g, 1.0);
  RealField S = RealField::sample(g, [](double x) { return 0.3 * x * x; });
  for (double a : {-0.3, 0.2}) EXPECT_LT(dilation_transform(rho, S, a, p).deviation, 1e-4);
}

TEST(Dilation, PairMapFixesMinimumProduct) {
  const double hbar = 1.0;
  for (double a : {-0.5, 0.1, 0.7}) {
    PairMap pm = uncertainty_pair_map(2.0, 0.125, a, hbar);
    EXPECT_NEAR(pm.product, 0.25, 1e-14);
  }
  PairMap id = uncertainty_pair_map(1.5, 0.4, 0.0, hbar);
  EXPECT_DOUBLE_EQ(id.dx2, 1.5);
  EXPECT_DOUBLE_EQ(id.dp2, 0.4);
  EXPECT_THROW(uncertainty_pair_map(0.0, 1.0, 0.1, hbar), Error);
}

TEST(Brackets, StaticStateValues) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-8.0, 8.0, 1601);
  RealField rho = normal_density(g, 1.0);
  BracketReport br = s_generator_brackets(rho, RealField(g, 0.0), p);
  const double U = br.generators.H;
  EXPECT_NEAR(br.s_H, -U, 1e-8);
  EXPECT_NEAR(br.s_K, U, 1e-8);
  EXPECT_EQ(br.s_s, 0.0);
}

TEST(CurvatureUncertainty, IsotropicGaussianMargin) {
  Grid1D g = Grid1D::span(-10.0, 10.0, 4001);
  RealField r = normal_density(g, 0.8);
  CurvatureUncertainty cu = curvature_uncertainty(r, r, r, 1.0);
  EXPECT_NEAR(cu.product, 3.0 * std::sqrt(2.0), 1e-5);
  EXPECT_NEAR(cu.margin, 2.0, 1e-5);
  EXPECT_NEAR(cu.heisenberg, 1.5, 1e-5);
  EXPECT_NEAR(cu.p2_curvature, cu.p2_density, 1e-5);
}

TEST(Informatics, NormalizationAndMoments) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-10.0, 10.0, 2001);
  WaveFunction psi = gaussian_packet(0.4, kSigma, kK0, p, g);
  InformaticsReport ir = informatics_suite(psi);
  EXPECT_NEAR(ir.f0, 1.0, 1e-10);
  EXPECT_NEAR(ir.mean_x, 0.4, 1e-8);
  EXPECT_NEAR(ir.mean_x_from_f, ir.mean_x, 1e-5);
  EXPECT_NEAR(ir.m2_from_f, ir.m2, 1e-4);
  EXPECT_NEAR(ir.robertson_margin, 0.0, 1e-6);
  EXPECT_LT(ir.convolution_gap, 1e-6);
}
