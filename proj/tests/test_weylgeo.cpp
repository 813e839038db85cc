#include <gtest/gtest.h>

#include <cmath>

#include "qlab/bohm.hpp"
#include "qlab/weylgeo.hpp"

using namespace qlab;

namespace {

RealField gaussian_rho(const Grid1D& g, double sigma) {
  return RealField::sample(g, [sigma](double x) { return std::exp(-x * x / (2.0 * sigma * sigma)); });
}

}  // namespace

TEST(WeylVector, GaussianIsLinear) {
  const double sigma = 0.9;
  Grid1D g = Grid1D::span(-5.0, 5.0, 1001);
  WeylVector w = weyl_vector(gaussian_rho(g, sigma), MetricDescriptor{});
  EXPECT_DOUBLE_EQ(w.coefficient, 1.0);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(w.phi[i], g.x(i) / (sigma * sigma), 1e-10);
}

TEST(WeylVector, DimensionTwoNeedsCoefficient) {
  Grid1D g = Grid1D::span(-1.0, 1.0, 11);
  MetricDescriptor md;
  md.n = 2;
  EXPECT_THROW(weyl_vector(gaussian_rho(g, 1.0), md), Error);
  EXPECT_NO_THROW(weyl_vector(gaussian_rho(g, 1.0), md, 0.5));
}

TEST(WeylVector, ConstantMetricOnlyShiftsLog) {
  Grid1D g = Grid1D::span(-4.0, 4.0, 401);
  MetricDescriptor md;
  md.g = RealField(g, 7.0);
  WeylVector a = weyl_vector(gaussian_rho(g, 1.0), MetricDescriptor{});
  WeylVector b = weyl_vector(gaussian_rho(g, 1.0), md);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(a.phi[i], b.phi[i], 1e-12);
}

TEST(WeylCurvature, ReproducesQuantumPotential) {
  PhysicalParams p(1.3, 0.7);
  Grid1D g = Grid1D::span(-6.0, 6.0, 2401);
  RealField rho = RealField::sample(g, [](double x) {
    return 0.6 * std::exp(-(x - 1.0) * (x - 1.0)) + 0.4 * std::exp(-(x + 1.2) * (x + 1.2) / 0.5);
  });
  MetricDescriptor md;
  MaskedField q = q_from_curvature(weyl_curvature(weyl_vector(rho, md), md), md, p);
  MaskedField ref = quantum_potential_density(rho, p);
  for (std::size_t i = 2; i + 2 < g.n; ++i)
    if (q.valid(i) && ref.valid(i)) EXPECT_NEAR(q[i], ref[i], 5e-4 * (1.0 + std::abs(ref[i])));
}

TEST(WeylCurvature, IdentityResidualVanishes) {
  Grid1D g = Grid1D::span(-5.0, 5.0, 2001);
  MaskedField r = weyl_identity_residual(gaussian_rho(g, 1.0));
  for (std::size_t i = 2; i + 2 < g.n; ++i)
    if (r.valid(i)) EXPECT_NEAR(r[i], 0.0, 1e-4 * (1.0 + g.x(i) * g.x(i)));
}

TEST(CurvatureExpectation, GaussianClosedForms) {
  const double sigma = 0.8;
  Grid1D g = Grid1D::span(-8.0, 8.0, 4001);
  RealField rho = gaussian_rho(g, sigma);
  const double z = integrate(rho);
  for (double& v : rho.values) v /= z;
  MetricDescriptor n3, n4;
  n4.n = 4;
  CurvatureExpectation e3 = curvature_expectation(rho, n3), e4 = curvature_expectation(rho, n4);
  EXPECT_NEAR(e3.from_phi, -2.0 / (sigma * sigma), 1e-6);
  EXPECT_NEAR(e3.from_curvature, -2.0 / (sigma * sigma), 1e-4);
  EXPECT_NEAR(e4.from_phi, -1.5 / (sigma * sigma), 1e-6);
  EXPECT_NEAR(e4.from_curvature, -1.5 / (sigma * sigma), 1e-4);
}

TEST(CurvatureExpectation, SeparableSumsAxes) {
  Grid1D g = Grid1D::span(-10.0, 10.0, 4001);
  auto norm = [&](double s) {
    RealField r = gaussian_rho(g, s);
    const double z = integrate(r);
    for (double& v : r.values) v /= z;
    return r;
  };
  SeparableCurvature sc = curvature_expectation_separable(norm(1.0), norm(2.0), norm(0.5));
  const double phi2 = 1.0 + 0.25 + 4.0;
  EXPECT_NEAR(sc.mean_phi_sq, phi2, 1e-5);
  EXPECT_NEAR(sc.mean_neg_curvature, 2.0 * phi2, 1e-3);
}

TEST(Minkowski, StaticDensityFormsAgree) {
  Grid1D s = Grid1D::span(-4.0, 4.0, 401);
  SpacetimeGrid g(s, 0.0, 0.05, 9, Signature::minkowski);
  SpacetimeField rho = SpacetimeField::sample(g, [](double, double x) { return std::exp(-x * x / 2.0); });
  MinkowskiCurvature mc = minkowski_weyl_curvature(rho);
  for (std::size_t j = 0; j < g.nt; ++j)
    for (std::size_t i = 1; i + 1 < s.n; ++i) {
      const double x = s.x(i);
      EXPECT_NEAR(mc.curvature.at(j, i), mc.box_form.at(j, i), 1e-3);
      EXPECT_NEAR(mc.box_form.at(j, i), 6.0 * (x * x / 4.0 - 0.5), 1e-3);
    }
}

TEST(Minkowski, RejectsEuclideanGrid) {
  Grid1D s = Grid1D::span(0.0, 1.0, 8);
  SpacetimeField rho(SpacetimeGrid(s, 0.0, 0.1, 8, Signature::euclidean), 1.0);
  EXPECT_THROW(minkowski_weyl_curvature(rho), Error);
}

TEST(Conformal, MatchesQuantumMassFactor) {
  Grid1D g = Grid1D::span(0.0, 1.0, 11);
  RealField q = RealField::sample(g, [](double x) { return std::sin(3.0 * x); });
  ConformalFactor cf = conformal_factor(q);
  QuantumMass qm = quantum_mass_field(q, 1.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_EQ(cf.exact[i], qm.omega_sq[i]);
    EXPECT_DOUBLE_EQ(cf.linear[i], 1.0 + q[i]);
  }
}

TEST(Conformal, ConstraintFactorIsOneForStaticUniformDensity) {
  Grid1D s = Grid1D::span(0.0, 1.0, 21);
  SpacetimeField rho(SpacetimeGrid(s, 0.0, 0.1, 6, Signature::minkowski), 2.5);
  SpacetimeField f = constraint_conformal_factor(rho, PhysicalParams{});
  for (double v : f.values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Gauge, TransformShiftsVectorAndScalesLength) {
  Grid1D g = Grid1D::span(0.0, 2.0, 201);
  RealField phi = RealField::sample(g, [](double x) { return x; });
  RealField beta(g, 2.0);
  RealField lam = RealField::sample(g, [](double x) { return 0.5 * x * x; });
  GaugePair gp = weyl_gauge_transform(phi, beta, lam);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_NEAR(gp.phi[i], 2.0 * g.x(i), 1e-12);
    EXPECT_NEAR(gp.beta[i], 2.0 * std::exp(-0.5 * g.x(i) * g.x(i)), 1e-15);
  }
}
