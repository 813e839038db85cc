#include "qlab/cli/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "qlab/bohm.hpp"
#include "qlab/cli/scenarios.hpp"
#include "qlab/evolve.hpp"
#include "qlab/inverseq.hpp"
#include "qlab/phasespace.hpp"
#include "qlab/weylgeo.hpp"

namespace qlab::cli {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double pi = std::numbers::pi;

void below(CheckResult& r, const std::string& label, double value, double limit) {
  r.conditions.push_back({label, value, limit, true});
}
void above(CheckResult& r, const std::string& label, double value, double limit) {
  r.conditions.push_back({label, value, limit, false});
}
// |ratio - 4| < half_width
void second_order(CheckResult& r, const std::string& label, double ratio, double half_width) {
  r.details[label + "_ratio"] = ratio;
  below(r, label + " |ratio - 4|", std::abs(ratio - 4.0), half_width);
}

bool interior(std::size_t i, std::size_t n, std::size_t k) { return i >= k && i + k < n; }

// max |a - b| / max |a| over samples valid in both and at least `edge` points from the ends
double rel_sup_diff(const MaskedField& a, const MaskedField& b, std::size_t edge = 3) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.mask[i] || b.mask[i] || !interior(i, a.size(), edge)) continue;
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(a[i]));
  }
  if (den == 0.0) throw Error(Errc::all_masked, "no common valid samples");
  return num / den;
}

//----------------------------------------------------------------------------------------------

void c01(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const double k = 1.0, A = 1.0;
  // nodes of cos(kx) at +-pi/2 fall on grid points
  const double dx = pi / 1000.0;
  const Grid1D g(-512.0 * dx, dx, 1024);
  WaveFunction psi = free_superposition(k, A, 0.3, p, g);
  PolarForm pf = to_polar(psi);
  MaskedField q = quantum_potential(pf, p);
  MaskedField sx = phase_gradient(pf);
  const double target = p.hbar * p.hbar * k * k / (2.0 * p.m);
  double qerr = 0.0, serr = 0.0;
  std::size_t used = 0, masked = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (q.mask[i]) {
      ++masked;
      continue;
    }
    if (!interior(i, g.n, 1)) continue;
    qerr = std::max(qerr, std::abs(q[i] - target) / target);
    ++used;
  }
  for (std::size_t i = 0; i < g.n; ++i)
    if (!sx.mask[i]) serr = std::max(serr, std::abs(sx[i]));
  r.details["points"] = g.n;
  r.details["masked"] = masked;
  r.details["compared"] = used;
  r.details["target_Q"] = target;
  below(r, "max relative Q error", qerr, tol);
  below(r, "max |S_x|", serr, 1e-10);
}

void c02(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const double omega = 1.0;
  const Grid1D g = Grid1D::span(-10.0, 10.0, 80001);
  Potential V = harmonic_potential(g, omega, p);
  double worst = 0.0, zero_err = 0.0;
  bool zero_count_ok = true;
  ojson levels = ojson::array();
  for (int n = 0; n <= 5; ++n) {
    WaveFunction psi = stationary_ho(n, omega, p, g);
    MaskedField q = quantum_potential(to_polar(psi), p);
    const double E = p.hbar * omega * (n + 0.5);
    double err = 0.0;
    std::vector<double> zeros;
    for (std::size_t i = 0; i < g.n; ++i) {
      if (q.mask[i] || !interior(i, g.n, 1)) continue;
      err = std::max(err, std::abs(q[i] + V.V[i] - E) / E);
      const std::size_t j = i + 1;
      if (j < g.n - 1 && !q.mask[j] && (q[i] < 0.0) != (q[j] < 0.0))
        zeros.push_back(g.x(i) + g.dx * q[i] / (q[i] - q[j]));
    }
    const double xz = std::sqrt(2.0 * p.hbar / (p.m * omega) * (n + 0.5));
    double zerr = 0.0;
    if (zeros.size() != 2) {
      zero_count_ok = false;
    } else {
      zerr = std::max(std::abs(zeros[0] + xz), std::abs(zeros[1] - xz));
    }
    worst = std::max(worst, err);
    zero_err = std::max(zero_err, zerr);
    levels.push_back({{"n", n}, {"rel_error", err}, {"zeros_found", zeros.size()}, {"zero_offset", zerr}});
  }
  r.details["dx"] = g.dx;
  r.details["levels"] = levels;
  below(r, "max relative error of Q + V - E", worst, tol);
  below(r, "max zero offset / dx", zero_err / g.dx, 1.0);
  below(r, "levels with a zero count other than 2", zero_count_ok ? 0.0 : 1.0, 0.5);
}

void c03(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-10.0, 10.0, 80001);
  const MetricDescriptor md;
  double worst = 0.0;
  ojson states = ojson::array();
  auto compare = [&](const std::string& name, const WaveFunction& psi, bool node_free) {
    MaskedField qa = quantum_potential(to_polar(psi), p);
    MaskedField qd = quantum_potential_density(psi.density(), p);
    ojson e{{"state", name}, {"amplitude_vs_density", rel_sup_diff(qa, qd)}};
    worst = std::max(worst, e["amplitude_vs_density"].get<double>());
    if (node_free) {
      MaskedField qw = q_from_curvature(weyl_curvature(weyl_vector(psi.density(), md), md), md, p);
      e["amplitude_vs_weyl"] = rel_sup_diff(qa, qw);
      e["density_vs_weyl"] = rel_sup_diff(qd, qw);
      worst = std::max({worst, e["amplitude_vs_weyl"].get<double>(), e["density_vs_weyl"].get<double>()});
    }
    states.push_back(e);
  };
  for (const std::string& name : test_state_names()) compare(name, make_test_state(name, g, p), true);
  for (int n = 1; n <= 3; ++n) compare("ho_" + std::to_string(n), stationary_ho(n, 1.0, p, g), false);
  compare("free_superposition", free_superposition(1.0, 1.0, 0.0, p, g), false);
  r.details["dx"] = g.dx;
  r.details["states"] = states;
  below(r, "max pairwise relative difference", worst, tol);
}

double identity_residual_max(const std::function<double(double)>& rho_fn, double dx, double window) {
  const double a = window + 2.0;
  const std::size_t n = static_cast<std::size_t>(std::lround(2.0 * a / dx)) + 1;
  const Grid1D g(-a, dx, n);
  MaskedField res = weyl_identity_residual(RealField::sample(g, rho_fn));
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(g.x(i)) <= window + 1e-9 && !res.mask[i]) worst = std::max(worst, std::abs(res[i]));
  return worst;
}

void c04(CheckResult& r, double tol, const CheckContext&) {
  struct Case {
    std::string name;
    std::function<double(double)> rho;
  };
  auto gauss = [](double x, double mu, double s) {
    return std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)) / (s * std::sqrt(2.0 * pi));
  };
  const std::vector<Case> cases{
      {"sech2", [](double x) { return 0.5 / (std::cosh(x) * std::cosh(x)); }},
      {"gaussian_mixture", [&](double x) { return 0.6 * gauss(x, -1.0, 0.8) + 0.4 * gauss(x, 1.2, 0.6); }},
      {"lorentzian_cubed", [](double x) { return std::pow(1.0 + 0.5 * x * x, -3.0); }},
  };
  ojson rows = ojson::array();
  for (const Case& c : cases) {
    const double coarse = identity_residual_max(c.rho, 0.02, 6.0);
    const double fine = identity_residual_max(c.rho, 0.01, 6.0);
    rows.push_back({{"density", c.name}, {"residual_dx", coarse}, {"residual_dx_half", fine}});
    second_order(r, c.name, coarse / fine, tol);
  }
  r.details["table"] = rows;
}

void c05(CheckResult& r, double tol, const CheckContext&) {
  auto residual = [](std::size_t n) {
    MinkowskiCurvature mc = minkowski_weyl_curvature(travelling_gaussian(n, n));
    double worst = 0.0, alt = 0.0;
    for (std::size_t k = 0; k < mc.curvature.values.size(); ++k) {
      worst = std::max(worst, std::abs(mc.curvature.values[k] - mc.box_form.values[k]));
      alt = std::max(alt, std::abs(mc.alternative.values[k] - mc.box_form.values[k]));
    }
    return std::pair{worst, alt};
  };
  auto [coarse, alt_coarse] = residual(256);
  auto [fine, alt_fine] = residual(511);
  r.details["grid"] = "256x256 and 511x511";
  r.details["residual_coarse"] = coarse;
  r.details["residual_fine"] = fine;
  r.details["alternative_form_gap_coarse"] = alt_coarse;
  r.details["alternative_form_gap_fine"] = alt_fine;
  second_order(r, "minkowski", coarse / fine, tol);
}

// unit-frequency oscillator eigenstate sampled at count times spaced dt
EvolutionRecord stationary_record(int n, const Grid1D& g, const PhysicalParams& p, double dt, std::size_t count) {
  EvolutionRecord rec;
  rec.dt = dt;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = dt * static_cast<double>(j);
    rec.snapshots.push_back({t, stationary_ho_at(n, 1.0, p, g, t)});
  }
  return rec;
}

struct PacketResiduals {
  double hj = 0.0, cont = 0.0, euler = 0.0;
};

PacketResiduals packet_residuals(std::size_t nx, double dt, std::size_t steps) {
  const PhysicalParams p(1.0, 1.0);
  const double xc = -1.0, sigma = 1.0, k0 = 1.0;
  const Grid1D g = Grid1D::span(-20.0, 20.0, nx);
  Potential V = zero_potential(g);
  EvolutionRecord rec = propagate_cn(gaussian_packet(xc, sigma, k0, p, g), V, dt, steps);
  MadelungResiduals mr = madelung_residuals(rec, V);
  EulerResidual er = euler_residual(rec, V);
  // fixed physical window around the exact packet centre
  PacketResiduals out;
  for (std::size_t j = 0; j < mr.times.size(); ++j) {
    const double t = mr.times[j];
    const double centre = xc + p.hbar * k0 * t / p.m;
    const double width = sigma * std::sqrt(1.0 + std::pow(p.hbar * t / (2.0 * p.m * sigma * sigma), 2));
    for (std::size_t i = 0; i < g.n; ++i) {
      if (std::abs(g.x(i) - centre) > 3.5 * width) continue;
      if (!mr.hj[j].mask[i]) out.hj = std::max(out.hj, std::abs(mr.hj[j][i]));
      if (!mr.cont[j].mask[i]) out.cont = std::max(out.cont, std::abs(mr.cont[j][i]));
      if (!er.residual[j].mask[i]) out.euler = std::max(out.euler, std::abs(er.residual[j][i]));
    }
  }
  return out;
}

void c06(CheckResult& r, double tol, const CheckContext&) {
  PacketResiduals a = packet_residuals(1001, 0.02, 50);
  PacketResiduals b = packet_residuals(2001, 0.01, 100);
  r.details["coarse"] = {{"dx", 0.04}, {"dt", 0.02}, {"hj", a.hj}, {"continuity", a.cont}, {"euler", a.euler}};
  r.details["fine"] = {{"dx", 0.02}, {"dt", 0.01}, {"hj", b.hj}, {"continuity", b.cont}, {"euler", b.euler}};
  second_order(r, "hamilton_jacobi", a.hj / b.hj, tol);
  second_order(r, "continuity", a.cont / b.cont, tol);
  second_order(r, "euler", a.euler / b.euler, tol);

  const PhysicalParams p(1.0, 1.0);
  const double omega = 1.0;
  const Grid1D g = Grid1D::span(-8.0, 8.0, 3201);
  Potential V = harmonic_potential(g, omega, p);
  ResidualOptions opt;
  opt.bulk_rel = 1e-3;
  ojson st = ojson::array();
  for (int n : {0, 1}) {
    EvolutionRecord rec = stationary_record(n, g, p, 0.01, 5);
    MadelungResiduals mr = madelung_residuals(rec, V, opt);
    EulerResidual er = euler_residual(rec, V, opt);
    const double energy = p.hbar * omega * (n + 0.5);
    const double length = std::sqrt(p.hbar / (p.m * omega));
    st.push_back({{"n", n}, {"hj", mr.max_hj}, {"continuity", mr.max_cont}, {"euler", er.max_abs}});
    const std::string tag = "stationary n=" + std::to_string(n);
    below(r, tag + " hj / energy", mr.max_hj / energy, 1e-4);
    below(r, tag + " continuity / (energy/hbar)", mr.max_cont * p.hbar / energy, 1e-4);
    below(r, tag + " euler / (energy/length)", er.max_abs * length / energy, 1e-4);
  }
  r.details["stationary"] = st;
}

void c07(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-15.0, 15.0, 1501);
  Potential V = harmonic_potential(g, 1.0, p);
  EvolutionRecord rec = propagate_cn(gaussian_packet(1.5, 0.9, 0.5, p, g), V, 0.005, 1000, 10);
  const double n0 = rec.snapshots.front().psi.norm();
  double drift = 0.0;
  for (const Snapshot& s : rec.snapshots) drift = std::max(drift, std::abs(s.psi.norm() - n0));
  r.details["steps"] = 1000;
  r.details["initial_norm"] = n0;
  below(r, "max norm drift", drift, tol);
}

void c08(CheckResult& r, double tol, const CheckContext& ctx) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-15.0, 15.0, 1501);
  const std::size_t count = 10000;
  const std::uint64_t seed = 20240611;
  TrajectoryOptions topt;
  topt.substeps = 4;
  struct Case {
    std::string name;
    EvolutionRecord rec;
  };
  std::vector<Case> cases;
  cases.push_back({"free_gaussian", propagate_cn(gaussian_packet(-1.0, 1.0, 1.0, p, g), zero_potential(g), 0.005, 200, 2)});
  cases.push_back({"harmonic_displaced", propagate_cn(gaussian_packet(1.5, std::sqrt(0.5), 0.0, p, g),
                                                      harmonic_potential(g, 1.0, p), 0.005, 200, 2)});
  cases.push_back({"harmonic_ground", stationary_record(0, g, p, 0.01, 101)});
  ojson rows = ojson::array();
  for (const Case& c : cases) {
    EquivarianceResult er = equivariance_check(c.rec, count, seed, ctx.threads, topt);
    rows.push_back({{"scenario", c.name}, {"ks", er.ks}, {"node_hits", er.node_hits}});
    below(r, c.name + " KS distance", er.ks, tol);
  }
  r.details["particles"] = count;
  r.details["seed"] = seed;
  r.details["scenarios"] = rows;
}

void c09(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-8.0, 8.0, 801);
  ojson rows = ojson::array();
  for (int n = 0; n <= 2; ++n) {
    WaveFunction psi = stationary_ho(n, 1.0, p, g);
    QProfile qp{fill_masked(quantum_potential(to_polar(psi), p)), p};
    AmplitudeSolution amp = solve_amplitude(qp);
    RealField truth = psi.amplitude();
    double err = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) err = std::max(err, std::abs(amp.R[i] - truth[i]));
    rows.push_back({{"n", n}, {"sup_error", err}, {"defect", amp.defect}, {"scale", amp.scale}});
    below(r, "oscillator n=" + std::to_string(n) + " sup error", err, tol);
    below(r, "oscillator n=" + std::to_string(n) + " defect / scale", amp.defect / amp.scale, 1e-6);
  }
  const double L = 1.0;
  const Grid1D gs = Grid1D::span(0.0, L, 1001);
  QProfile sq{RealField(gs, -p.hbar * p.hbar / (2.0 * p.m) * (pi / L) * (pi / L)), p};
  AmplitudeSolution amp = solve_amplitude(sq);
  double err = 0.0;
  for (std::size_t i = 0; i < gs.n; ++i)
    err = std::max(err, std::abs(amp.R[i] - std::sqrt(2.0 / L) * std::sin(pi * gs.x(i) / L)));
  rows.push_back({{"case", "sine_kernel"}, {"sup_error", err}, {"defect", amp.defect}, {"scale", amp.scale}});
  r.details["cases"] = rows;
  below(r, "sine kernel sup error", err, 1e-6);
}

void c10(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-6.0, 6.0, 601);
  WaveFunction psi = stationary_ho(0, 1.0, p, g);
  QProfile qp{quantum_potential(to_polar(psi), p).field, p};
  AmplitudeSolution amp = solve_amplitude(qp);
  std::vector<double> times;
  for (int j = 0; j <= 10; ++j) times.push_back(0.1 * j);
  ReconstructionResult rc = reconstruct_static(qp, amp, TimeFunction::constant(0.5, times.size()), times);
  ReconstructionResult rt = reconstruct_static(
      qp, amp, TimeFunction::sampled(times, [](double t) { return t; }, [](double) { return 1.0; }), times);
  r.details["const"] = {{"max_dVx_dt", rc.max_dVx_dt}, {"stationary_exception", rc.stationary_exception}};
  r.details["linear"] = {{"max_dVx_dt", rt.max_dVx_dt},
                         {"vx_scale", rt.vx_scale},
                         {"stationary_exception", rt.stationary_exception}};
  below(r, "f const: max |dV_x/dt|", rc.max_dVx_dt, tol);
  above(r, "f = t: max |dV_x/dt| / field scale", rt.max_dVx_dt / rt.vx_scale, 1e-3);
  above(r, "f const flags the stationary exception", rc.stationary_exception ? 1.0 : 0.0, 0.5);
  below(r, "f = t does not flag it", rt.stationary_exception ? 1.0 : 0.0, 0.5);
}

void c11(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-10.0, 10.0, 2001);
  struct Case {
    std::string name;
    WaveFunction psi;
    std::vector<double> xs;
    std::function<double(double)> target;
  };
  std::vector<Case> cases{
      {"gaussian", gaussian_packet(0.0, 1.0, 0.7, p, g), {-1.0, 0.0, 0.5, 1.7}, [](double) { return -0.25; }},
      {"oscillator_n1", stationary_ho(1, 1.0, p, g), {-1.5, -0.8, 0.6, 1.3},
       [](double x) { return -0.5 / (x * x) - 0.5; }},
  };
  double worst = 0.0, product = 0.0;
  ojson rows = ojson::array();
  for (const Case& c : cases) {
    for (double x : c.xs) {
      LogCurvature lc = log_zq_curvature(c.psi, x);
      const double err = std::abs(lc.extrapolated - c.target(x));
      worst = std::max(worst, err);
      rows.push_back({{"state", c.name}, {"x", x}, {"extrapolated", lc.extrapolated},
                      {"analytic", c.target(x)}, {"error", err}});
    }
    FluctuationReport fr = fluctuation_suite(c.psi.density(), p);
    product = std::max(product, fr.product_residual);
  }
  r.details["samples"] = rows;
  r.details["product_residual"] = product;
  below(r, "max curvature error", worst, tol);
  below(r, "exact-uncertainty product residual", product, 1e-12);
}

void c12(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-20.0, 20.0, 4001);
  double worst = 0.0, min_margin = 1e300, gauss = 0.0;
  ojson rows = ojson::array();
  for (const std::string& name : test_state_names()) {
    UncertaintyReport u = exact_uncertainty(make_test_state(name, g, p));
    const double gap = std::abs(u.dp2 - u.dp2_q);
    worst = std::max(worst, gap);
    min_margin = std::min(min_margin, u.heisenberg - 0.5 * p.hbar);
    if (name == "gaussian") gauss = std::abs(u.heisenberg - 0.5 * p.hbar);
    rows.push_back({{"state", name}, {"dp2_fourier", u.dp2}, {"dp2_decomposed", u.dp2_q}, {"gap", gap},
                    {"dx_dp", u.heisenberg}});
  }
  r.details["states"] = rows;
  below(r, "max |dp2 - decomposition|", worst, tol);
  below(r, "gaussian |dx dp - hbar/2|", gauss, 1e-6);
  above(r, "min dx dp - hbar/2", min_margin, -1e-9);
}

void c13(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-15.0, 15.0, 3001);
  RealField rho = RealField::sample(g, [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); });
  RealField S = RealField::sample(g, [](double x) { return 0.8 * x + 0.3 * x * x; });
  double worst = 0.0, fixed = 0.0;
  ojson rows = ojson::array();
  const double dx2 = 1.7;
  const double dp2 = 0.25 * p.hbar * p.hbar / dx2;
  for (double a : {-0.3, -0.1, 0.1, 0.3}) {
    DilationResult d = dilation_transform(rho, S, a, p);
    worst = std::max(worst, d.deviation);
    PairMap pm = uncertainty_pair_map(dx2, dp2, a, p.hbar);
    const double fp = std::abs(pm.product - 0.25 * p.hbar * p.hbar) / (0.25 * p.hbar * p.hbar);
    fixed = std::max(fixed, fp);
    rows.push_back({{"alpha", a}, {"deviation", d.deviation}, {"H_after", d.after.H}, {"H_mixed", d.mixed.H},
                    {"K_after", d.after.K}, {"K_mixed", d.mixed.K}, {"fixed_point_error", fp}});
  }
  r.details["alphas"] = rows;
  below(r, "max relative mix deviation", worst, tol);
  below(r, "fixed point relative error", fixed, 1e-12);
}

void c14(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-15.0, 15.0, 3001);
  struct Case {
    std::string name;
    RealField rho, S;
  };
  std::vector<Case> cases{
      {"gaussian_boost", RealField::sample(g, [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); }),
       RealField::sample(g, [](double x) { return 0.7 * x; })},
      {"sech_chirp", RealField::sample(g, [](double x) { return 0.5 / (std::cosh(x) * std::cosh(x)); }),
       RealField::sample(g, [](double x) { return 0.2 * x * x - 0.3 * x; })},
  };
  double worst = 0.0;
  ojson rows = ojson::array();
  for (const Case& c : cases) {
    BracketReport b = s_generator_brackets(c.rho, c.S, p);
    const double e1 = std::abs(b.s_H - b.generators.K), e2 = std::abs(b.s_K - b.generators.H);
    worst = std::max({worst, e1, e2, std::abs(b.s_s)});
    rows.push_back({{"state", c.name}, {"s_H", b.s_H}, {"K", b.generators.K}, {"s_K", b.s_K},
                    {"H", b.generators.H}, {"s_s", b.s_s}});
  }
  // closed forms for the boosted Gaussian: T = k^2 / 2m, U = hbar^2 / (8 m sigma^2)
  const double T = 0.49 / (2.0 * p.m), U = p.hbar * p.hbar / (8.0 * p.m);
  BracketReport b = s_generator_brackets(cases[0].rho, cases[0].S, p);
  const double closed = std::max(std::abs(b.s_H - (T - U)), std::abs(b.s_K - (T + U)));
  r.details["states"] = rows;
  r.details["closed_form_gap"] = closed;
  below(r, "max bracket mismatch", worst, tol);
  below(r, "closed-form mismatch", closed, tol);
}

RealField normal(const Grid1D& g, double s) {
  return RealField::sample(g, [s](double x) { return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * pi)); });
}

void c15(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  auto axis = [](double s) { return Grid1D::span(-12.0 * s, 12.0 * s, 2401); };
  CurvatureUncertainty iso = curvature_uncertainty(normal(axis(1.0), 1.0), normal(axis(1.0), 1.0),
                                                   normal(axis(1.0), 1.0), p.hbar);
  CurvatureUncertainty an1 = curvature_uncertainty(normal(axis(1.0), 1.0), normal(axis(2.0), 2.0),
                                                   normal(axis(3.0), 3.0), p.hbar);
  const Grid1D gm = axis(2.0);
  RealField mix = RealField::sample(gm, [](double x) {
    auto n = [](double y, double mu, double s) {
      return std::exp(-0.5 * (y - mu) * (y - mu) / (s * s)) / (s * std::sqrt(2.0 * pi));
    };
    return 0.5 * n(x, -1.5, 0.7) + 0.5 * n(x, 1.5, 0.7);
  });
  CurvatureUncertainty an2 = curvature_uncertainty(normal(axis(0.5), 0.5), normal(axis(1.0), 1.0), mix, p.hbar);
  auto row = [](const CurvatureUncertainty& c) {
    return ojson{{"dq2", c.dq2}, {"mean_neg_curvature", c.mean_neg_curvature}, {"product", c.product},
                 {"margin", c.margin}};
  };
  r.details["isotropic"] = row(iso);
  r.details["anisotropic_123"] = row(an1);
  r.details["anisotropic_mixture"] = row(an2);
  below(r, "isotropic |product - 3 sqrt 2|", std::abs(iso.product - 3.0 * std::numbers::sqrt2), tol);
  below(r, "isotropic |margin - 2|", std::abs(iso.margin - 2.0), tol);
  above(r, "anisotropic (1,2,3) margin", an1.margin, 1.0);
  above(r, "anisotropic mixture margin", an2.margin, 1.0);
}

void c16(CheckResult& r, double tol, const CheckContext&) {
  const PhysicalParams p(1.0, 1.0);
  const Grid1D g = Grid1D::span(-10.0, 10.0, 2001);
  // freely spreading Gaussian at t = 0.5: rho_t = -(rho v)_x with v = x s'/s
  const double s0 = 1.0, t = 0.5;
  const double a = p.hbar / (2.0 * p.m * s0 * s0);
  const double s = s0 * std::sqrt(1.0 + a * a * t * t);
  const double rate = a * a * t / (1.0 + a * a * t * t);  // s'/s
  RealField rho = normal(g, s);
  RealField rho_t = RealField::sample(g, [&](double x) {
    const double r0 = std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * pi));
    return r0 * rate * (x * x / (s * s) - 1.0);
  });
  const double x_ref = 0.5;
  const double F = rho[1050] * x_ref * rate;  // flux rho v at x_ref
  FluxReconstruction fr = flux_reconstruction(rho, rho_t, F, x_ref, p);
  double sx_err = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    if (!fr.S_x.mask[i] && std::abs(g.x(i)) < 4.0)
      sx_err = std::max(sx_err, std::abs(fr.S_x[i] - p.m * g.x(i) * rate));
  GaugeDifference gd = gauge_freedom(rho, rho_t, F, F + 0.3, x_ref, p);
  GaugeDifference gs = gauge_freedom(rho, RealField(g, 0.0), 0.0, 0.3, x_ref, p);
  r.details["flux_residual"] = fr.residual;
  r.details["phase_gradient_error"] = sx_err;
  r.details["identity_residual"] = gd.identity_residual;
  r.details["closed_form_gap_moving"] = gd.closed_form_gap;
  r.details["closed_form_gap_static"] = gs.closed_form_gap;
  below(r, "consistency identity residual", gd.identity_residual, tol);
  below(r, "continuity reconstruction residual", fr.residual, 1e-8);
  below(r, "static closed form gap", gs.closed_form_gap, tol);
}

double process_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<CheckResult> run_pass(const std::vector<const CheckSpec*>& specs, const CheckContext& ctx) {
  std::vector<CheckResult> out;
  for (const CheckSpec* s : specs) out.push_back(run_check(*s, ctx));
  return out;
}

void c17(CheckResult& r, double, const CheckContext& ctx) {
  std::vector<const CheckSpec*> specs;
  for (const CheckSpec& s : check_registry())
    if (s.id != "c17" && matches_filter(s, ctx.filter)) specs.push_back(&s);
  if (specs.empty())
    for (const CheckSpec& s : check_registry())
      if (s.id != "c17") specs.push_back(&s);
  std::vector<CheckResult> first;
  double first_seconds = 0.0;
  if (ctx.previous && ctx.previous->size() == specs.size()) {
    first = *ctx.previous;
    for (const CheckResult& c : first) first_seconds += c.seconds;
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    first = run_pass(specs, ctx);
    first_seconds = process_seconds(t0);
  }
  std::vector<CheckResult> second = run_pass(specs, ctx);
  std::size_t differing = 0;
  ojson ids = ojson::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ids.push_back(specs[i]->id);
    if (first[i].to_json().dump() != second[i].to_json().dump()) ++differing;
  }
  r.seconds = first_seconds;  // run_check adds the second pass
  r.details["checks_repeated"] = ids;
  below(r, "reports differing between two runs", static_cast<double>(differing), 0.5);
}

}  // namespace

//----------------------------------------------------------------------------------------------

bool CheckResult::passed() const {
  if (!error.empty() || conditions.empty()) return false;
  for (const Condition& c : conditions)
    if (!c.passed()) return false;
  return within_budget();
}

nlohmann::ordered_json CheckResult::to_json() const {
  ojson j;
  j["id"] = id;
  j["name"] = name;
  j["passed"] = passed();
  j["tolerance"] = tolerance;
  if (budget_s > 0.0) j["runtime_budget_s"] = budget_s;
  ojson conds = ojson::array();
  for (const Condition& c : conditions)
    conds.push_back({{"label", c.label}, {"value", c.value}, {c.below ? "below" : "above", c.limit},
                     {"passed", c.passed()}});
  j["conditions"] = conds;
  if (!error.empty()) j["error"] = error;
  j["details"] = details;
  return j;
}

const std::vector<CheckSpec>& check_registry() {
  static const std::vector<CheckSpec> reg{
      {"c01", "free_superposition_q", 1e-6, 1.0, c01},
      {"c02", "harmonic_q", 1e-4, 1.0, c02},
      {"c03", "route_agreement", 1e-6, 0.0, c03},
      {"c04", "weyl_identity", 0.5, 0.0, c04},
      {"c05", "minkowski_weyl_identity", 0.5, 0.0, c05},
      {"c06", "madelung_euler_residuals", 0.5, 10.0, c06},
      {"c07", "unitarity", 1e-7, 0.0, c07},
      {"c08", "equivariance", 0.025, 30.0, c08},
      {"c09", "inverse_round_trip", 1e-4, 0.0, c09},
      {"c10", "no_go_dichotomy", 1e-10, 0.0, c10},
      {"c11", "olavo_limit", 1e-4, 0.0, c11},
      {"c12", "exact_uncertainty", 1e-6, 0.0, c12},
      {"c13", "dilation_covariance", 1e-4, 0.0, c13},
      {"c14", "bracket_algebra", 1e-6, 0.0, c14},
      {"c15", "curvature_uncertainty", 1e-6, 0.0, c15},
      {"c16", "gauge_freedom", 1e-10, 0.0, c16},
      {"c17", "determinism", 180.0, 180.0, c17},
  };
  return reg;
}

double effective_tolerance(const CheckSpec& spec) {
  std::string key = "QLAB_TOL_" + spec.id;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::toupper(ch); });
  if (const char* v = std::getenv(key.c_str())) {
    char* end = nullptr;
    const double d = std::strtod(v, &end);
    if (end != v && *end == '\0') return d;
    throw Error(Errc::invalid_argument, key + " is not a number");
  }
  return spec.tolerance;
}

bool matches_filter(const CheckSpec& spec, const std::string& filter) {
  return filter.empty() || spec.id.find(filter) != std::string::npos || spec.name.find(filter) != std::string::npos;
}

CheckResult run_check(const CheckSpec& spec, const CheckContext& ctx) {
  CheckResult r;
  r.id = spec.id;
  r.name = spec.name;
  r.tolerance = effective_tolerance(spec);
  r.budget_s = spec.id == "c17" ? r.tolerance : spec.budget_s;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    spec.run(r, r.tolerance, ctx);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds += process_seconds(t0);
  return r;
}

std::vector<CheckResult> run_checks(const std::string& filter, const CheckContext& ctx) {
  std::vector<CheckResult> out;
  for (const CheckSpec& s : check_registry()) {
    if (!matches_filter(s, filter)) continue;
    if (s.id == "c17") {
      CheckContext c = ctx;
      c.filter = filter;
      c.previous = &out;
      out.push_back(run_check(s, c));
    } else {
      out.push_back(run_check(s, ctx));
    }
  }
  return out;
}

}  // namespace qlab::cli
