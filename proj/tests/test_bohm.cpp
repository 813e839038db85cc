#include <gtest/gtest.h>

#include <cmath>

#include "qlab/bohm.hpp"

using namespace qlab;

TEST(Trajectory, PlaneWaveMovesUniformly) {
  PhysicalParams p(1.0, 2.0);
  const double k = 1.3;
  Grid1D g = Grid1D::span(-10.0, 10.0, 401);
  EvolutionRecord rec = analytic_record(g, p, 0.0, 0.05, 41, [&](double x, double t) {
    const double e = p.hbar * k * k / (2.0 * p.m);
    return std::polar(1.0, k * x - e * t);
  }, false);
  Trajectory tr = integrate_trajectory(rec, -2.0, {4});
  ASSERT_EQ(tr.positions.size(), tr.times.size());
  for (std::size_t j = 0; j < tr.times.size(); ++j)
    EXPECT_NEAR(tr.positions[j], -2.0 + p.hbar * k / p.m * tr.times[j], 1e-9);
  EXPECT_FALSE(tr.hit_node);
}

TEST(Trajectory, SpreadingGaussianFollowsScaledFlow) {
  // x(t) = x0 sqrt(1 + (t / 2)^2) for sigma = 1, hbar = m = 1
  PhysicalParams p;
  Grid1D g = Grid1D::span(-12.0, 12.0, 2401);
  EvolutionRecord rec = analytic_record(g, p, 0.0, 0.02, 51, [](double x, double t) {
    const cplx w = cplx(1.0, 0.5 * t);
    return std::exp(-x * x / (4.0 * w)) / std::sqrt(w);
  });
  Trajectory tr = integrate_trajectory(rec, 0.8, {4});
  const double t = tr.times.back();
  EXPECT_NEAR(tr.positions.back(), 0.8 * std::sqrt(1.0 + 0.25 * t * t), 1e-5);
}

TEST(Sampling, DeterministicPerSeed) {
  Grid1D g = Grid1D::span(-5.0, 5.0, 501);
  RealField rho = RealField::sample(g, [](double x) { return std::exp(-x * x); });
  Ensemble a = sample_density(rho, 1000, 42), b = sample_density(rho, 1000, 42), c = sample_density(rho, 1000, 43);
  EXPECT_EQ(a.particles, b.particles);
  EXPECT_NE(a.particles, c.particles);
  EXPECT_LT(ks_distance(a.particles, rho), 0.05);
  for (double x : a.particles) EXPECT_TRUE(g.contains(x));
}

TEST(Sampling, KsDistanceDetectsShift) {
  Grid1D g = Grid1D::span(-5.0, 5.0, 501);
  RealField rho = RealField::sample(g, [](double x) { return std::exp(-x * x); });
  Ensemble a = sample_density(rho, 2000, 1);
  for (double& x : a.particles) x += 0.5;
  EXPECT_GT(ks_distance(a.particles, rho), 0.2);
  EXPECT_THROW(ks_distance({}, rho), Error);
}

TEST(Equivariance, ThreadCountDoesNotChangeResult) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-10.0, 10.0, 801);
  EvolutionRecord rec = propagate_cn(gaussian_packet(0.0, 1.0, 0.5, p, g), zero_potential(g), 0.01, 50, 5);
  EquivarianceResult a = equivariance_check(rec, 400, 9, 1, {2});
  EquivarianceResult b = equivariance_check(rec, 400, 9, 4, {2});
  EXPECT_EQ(a.final_positions, b.final_positions);
  EXPECT_EQ(a.ks, b.ks);
  EXPECT_LT(a.ks, 0.07);
}

TEST(QuantumMass, ClosedForms) {
  Grid1D g = Grid1D::span(0.0, 1.0, 8);
  RealField q = RealField::sample(g, [](double x) { return 0.6 * x - 0.4; });
  QuantumMass qm = quantum_mass_field(q, 2.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_DOUBLE_EQ(qm.omega_sq[i], std::exp(q[i]));
    EXPECT_NEAR(qm.mass[i], 2.0 * std::exp(0.5 * q[i]), 1e-15);
    EXPECT_NEAR(qm.mass_sq_lin[i], 4.0 * (1.0 + q[i]), 1e-15);
  }
  EXPECT_THROW(quantum_mass_field(q, 0.0), Error);
}

TEST(Geodesic, ConstantMassGivesStraightLine) {
  Grid1D g = Grid1D::span(-5.0, 5.0, 201);
  RealField m(g, 1.5);
  const double c = 2.0;
  std::array<double, 2> u = timelike_velocity(0.7, c);
  Trajectory tr = relativistic_geodesic(m, 0.0, u, {1e-2, 300, c});
  for (std::size_t j = 0; j < tr.tau.size(); ++j) {
    EXPECT_NEAR(tr.positions[j], 0.7 * tr.tau[j], 1e-12);
    EXPECT_NEAR(tr.u1[j], 0.7, 1e-12);
  }
}

TEST(Geodesic, MassWeightedEnergyIsConserved) {
  Grid1D g = Grid1D::span(-10.0, 10.0, 2001);
  RealField m = RealField::sample(g, [](double x) { return 1.0 + 0.3 * std::exp(-x * x); });
  Trajectory tr = relativistic_geodesic(m, -2.0, timelike_velocity(0.4, 1.0), {1e-2, 800, 1.0});
  const double e0 = interp_cubic(m, tr.positions.front()) * tr.u0.front();
  for (std::size_t j = 0; j < tr.tau.size(); j += 50) {
    // the force uses a second-order difference of log m, so conservation holds to O(dx^2)
    EXPECT_NEAR(interp_cubic(m, tr.positions[j]) * tr.u0[j], e0, 1e-5);
    EXPECT_NEAR(tr.u0[j] * tr.u0[j] - tr.u1[j] * tr.u1[j], 1.0, 1e-8);
  }
}

TEST(Geodesic, RejectsBadInput) {
  Grid1D g = Grid1D::span(-1.0, 1.0, 21);
  RealField m(g, 1.0);
  EXPECT_THROW(relativistic_geodesic(m, 0.0, {1.0, 0.5}, {}), Error);
  try {
    relativistic_geodesic(m, 0.9, timelike_velocity(3.0, 1.0), {1e-2, 100, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::left_domain);
  }
}

TEST(FloydMass, LinearFamilyScalesMass) {
  Grid1D g = Grid1D::span(0.0, 1.0, 8);
  QFamily fam = [&](double E) { return RealField(g, 0.25 * E); };
  RealField mf = floyd_mass(fam, 2.0, 1.0, 1e-3);
  for (double v : mf.values) EXPECT_NEAR(v, 2.0 * 0.75, 1e-12);
  EXPECT_THROW(floyd_mass(fam, 1.0, 1.0, 0.0), Error);
}
