#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qlab/evolve.hpp"
#include "qlab/inverseq.hpp"

using namespace qlab;

namespace {

QProfile ho_profile(int n, const Grid1D& g, const PhysicalParams& p) {
  MaskedField q = quantum_potential(to_polar(stationary_ho(n, 1.0, p, g)), p);
  return QProfile{fill_masked(q), p};
}

}  // namespace

TEST(Amplitude, SineKernelRecoversBoxGroundState) {
  // Q = hbar^2 pi^2 / 2m on [0, 1] with Dirichlet ends is solved by sin(pi x)
  PhysicalParams p(1.0, 0.5);
  Grid1D g = Grid1D::span(0.0, 1.0, 801);
  QProfile qp{RealField(g, std::numbers::pi * std::numbers::pi / (2.0 * p.m)), p};
  AmplitudeSolution a = solve_amplitude(qp);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(a.R[i], std::sqrt(2.0) * std::sin(std::numbers::pi * g.x(i)), 1e-5);
  EXPECT_LT(a.defect / a.scale, 1e-6);
  EXPECT_NEAR(a.R[0], 0.0, 1e-15);
}

TEST(Amplitude, OscillatorRoundTrip) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-8.0, 8.0, 801);
  for (int n = 0; n < 3; ++n) {
    QProfile qp = ho_profile(n, g, p);
    AmplitudeSolution a = solve_amplitude(qp);
    RealField ref = stationary_ho(n, 1.0, p, g).amplitude();
    double err = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) err = std::max(err, std::abs(a.R[i] - ref[i]));
    EXPECT_LT(err, 1e-4) << "level " << n;
  }
}

TEST(Amplitude, SolvedPotentialIsReproducedExactly) {
  // the discrete operator with Q_solved annihilates signed_R on the interior
  PhysicalParams p(0.8, 1.2);
  Grid1D g = Grid1D::span(-6.0, 6.0, 601);
  QProfile qp = ho_profile(1, g, p);
  AmplitudeSolution a = solve_amplitude(qp);
  const double beta = p.beta();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < g.n; ++i) {
    const double d2 = (a.signed_R[i - 1] - 2.0 * a.signed_R[i] + a.signed_R[i + 1]) / (g.dx * g.dx);
    worst = std::max(worst, std::abs(d2 + beta * a.Q_solved[i] * a.signed_R[i]));
  }
  EXPECT_LT(worst, 1e-8 * a.scale);
}

TEST(Reconstruction, ConstantFlagsStationaryException) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-6.0, 6.0, 601);
  QProfile qp = ho_profile(0, g, p);
  AmplitudeSolution a = solve_amplitude(qp);
  std::vector<double> times{0.0, 0.1, 0.2, 0.3, 0.4};
  ReconstructionResult c = reconstruct_static(qp, a, TimeFunction::constant(0.5, times.size()), times);
  EXPECT_TRUE(c.stationary_exception);
  EXPECT_EQ(c.max_dVx_dt, 0.0);
  ReconstructionResult lin = reconstruct_static(
      qp, a, TimeFunction::sampled(times, [](double t) { return t; }, [](double) { return 1.0; }), times);
  EXPECT_FALSE(lin.stationary_exception);
  EXPECT_GT(lin.max_dVx_dt, 1e-3);
  EXPECT_LT(lin.continuity_residual, 1e-12);
}

TEST(Reconstruction, TimeFunctionDifferences) {
  std::vector<double> times{0.0, 0.5, 1.0, 1.5};
  TimeFunction f = TimeFunction::sampled(times, [](double t) { return 3.0 * t + 1.0; });
  for (double d : f.diff(0.5)) EXPECT_NEAR(d, 3.0, 1e-12);
  TimeFunction two;
  two.values = {1.0, 2.0};
  EXPECT_THROW(two.diff(1.0), Error);
}

TEST(Stationary, RealAmplitudeGivesConstantEnergy) {
  PhysicalParams p;
  Grid1D g = Grid1D::span(-5.0, 5.0, 1001);
  RealField R = stationary_ho(0, 1.0, p, g).amplitude();
  RealField V = harmonic_potential(g, 1.0, p).V;
  StationaryFields sf = stationary_energy(R, 0.0, V, p);
  EXPECT_NEAR(sf.mean, 0.5, 1e-4);
  EXPECT_LT(sf.deviation, 1e-3);
  StationaryFields sp = stationary_potential(R, 0.0, 0.5, p);
  for (std::size_t i = 0; i < g.n; ++i)
    if (sp.out.valid(i) && std::abs(g.x(i)) < 3.0) EXPECT_NEAR(sp.out[i], V[i], 1e-4 * (1.0 + V[i]));
}

TEST(Milne, ConstantSolutionHasZeroQ) {
  PhysicalParams p(1.0, 2.0);
  const double E = 0.7, c = 1.1;
  const double R0 = std::pow(c * c / (2.0 * p.m * E), 0.25);
  Grid1D g = Grid1D::span(0.0, 3.0, 301);
  auto V = [](double) { return 0.0; };
  RealField R = milne_amplitude(g, V, E, c, p, R0, 0.0);
  for (double r : R.values) EXPECT_NEAR(r, R0, 1e-12);
  RealField Q = stationary_q_family(g, V, c, p, R0, 0.0)(E);
  for (double q : Q.values) EXPECT_NEAR(q, 0.0, 1e-12);
}

TEST(Csv, RoundTripIsExact) {
  PhysicalParams p(0.9, 1.3);
  Grid1D g(-1.0, 0.125, 17);
  QProfile qp{RealField::sample(g, [](double x) { return std::sin(x) / 3.0; }), p};
  std::stringstream ss;
  write_qprofile(ss, qp);
  QProfile back = read_qprofile(ss);
  EXPECT_EQ(back.params.hbar, p.hbar);
  EXPECT_EQ(back.params.m, p.m);
  EXPECT_EQ(back.Q.grid.n, g.n);
  EXPECT_EQ(back.Q.values, qp.Q.values);
}

TEST(Csv, TimeDependentRoundTrip) {
  PhysicalParams p;
  Grid1D g(0.0, 0.1, 10);
  TimeQProfile tq;
  tq.params = p;
  tq.times = {0.0, 0.25, 0.5};
  for (double t : tq.times) tq.Q.push_back(RealField::sample(g, [t](double x) { return x * t; }));
  std::stringstream ss;
  write_qprofile(ss, tq);
  TimeQProfile back = read_qprofile_csv(ss);
  EXPECT_EQ(back.times, tq.times);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back.Q[j].values, tq.Q[j].values);
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream unknown("# hbar=1 m=1 x0=0 dx=0.1 n=8 mass=2\n");
  EXPECT_THROW(read_qprofile_csv(unknown), Error);
  std::stringstream missing("# hbar=1 m=1 x0=0 n=8\n0,1\n");
  EXPECT_THROW(read_qprofile_csv(missing), Error);
  std::stringstream short_rows("# hbar=1 m=1 x0=0 dx=0.1 n=8\n0,1\n0.1,1\n");
  EXPECT_THROW(read_qprofile_csv(short_rows), Error);
}

TEST(Flux, ReconstructsGaussianVelocity) {
  // spreading Gaussian, sigma_0 = 1, hbar = m = 1: S_x = x (t/4) / (1 + t^2/4)
  PhysicalParams p;
  const double t = 0.5, s2 = 1.0 + t * t / 4.0;
  Grid1D g = Grid1D::span(-8.0, 8.0, 1601);
  RealField rho = RealField::sample(g, [&](double x) {
    return std::exp(-x * x / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2);
  });
  const double ds2 = t / 2.0;  // d(s2)/dt
  RealField rho_t = RealField::sample(g, [&](double x) {
    const double r = std::exp(-x * x / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2);
    return r * ds2 * (x * x / (2.0 * s2 * s2) - 0.5 / s2);
  });
  const double v = (t / 4.0) / s2;
  const double xr = 0.5;
  const double F = std::exp(-xr * xr / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2) * xr * v;
  FluxReconstruction fr = flux_reconstruction(rho, rho_t, F, xr, p);
  EXPECT_LT(fr.residual, 1e-12);
  for (std::size_t i = 0; i < g.n; i += 10)
    if (fr.S_x.valid(i) && std::abs(g.x(i)) < 2.5) EXPECT_NEAR(fr.S_x[i], v * g.x(i), 1e-4);
}

TEST(Gauge, StaticDensityMatchesClosedForm) {
  PhysicalParams p(1.0, 1.5);
  Grid1D g = Grid1D::span(-4.0, 4.0, 801);
  RealField rho = RealField::sample(g, [](double x) { return std::exp(-x * x); });
  GaugeDifference gd = gauge_freedom(rho, RealField(g, 0.0), 0.2, 0.5, 0.0, p);
  EXPECT_LT(gd.identity_residual, 1e-12);
  EXPECT_LT(gd.closed_form_gap, 1e-12);
  for (std::size_t i = 0; i < g.n; ++i)
    if (gd.dS_x.valid(i)) EXPECT_NEAR(gd.dS_x[i] * rho[i], p.m * 0.3, 1e-12);
}
