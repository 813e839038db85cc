#include "qlab/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qlab/bohm.hpp"
#include "qlab/cli/checks.hpp"
#include "qlab/cli/output.hpp"
#include "qlab/cli/scenarios.hpp"
#include "qlab/format.hpp"
#include "qlab/inverseq.hpp"
#include "qlab/phasespace.hpp"
#include "qlab/weylgeo.hpp"

namespace qlab::cli {

namespace {

using ojson = nlohmann::ordered_json;
using Rows = std::vector<std::vector<Cell>>;
using Clock = std::chrono::steady_clock;

double valid_flag(const Mask& m, std::size_t i) { return m[i] ? 0.0 : 1.0; }

unsigned thread_count(const ScenarioConfig& cfg) {
  const std::size_t t = cfg.count("threads");
  if (t == 0) throw ConfigError("key 'threads' must be at least 1");
  return static_cast<unsigned>(t);
}

// Sum of |psi|^2 dx; the quantity the scheme conserves exactly.
double discrete_norm(const WaveFunction& psi) {
  double s = 0.0;
  for (const cplx& z : psi.field.values) s += std::norm(z);
  return s * psi.grid().dx;
}

EvolutionRecord evolve_from(const ScenarioConfig& cfg) {
  const Grid1D g = grid_from(cfg);
  const std::size_t stride = cfg.count("stride");
  if (stride == 0) throw ConfigError("key 'stride' must be at least 1");
  const double dt = cfg.num("dt");
  if (!(dt > 0.0)) throw ConfigError("key 'dt' must be positive");
  return propagate_cn(initial_state(cfg, g), potential_from(cfg, g), dt, cfg.count("nt"), stride);
}

// Exact time dependence for the non-normalizable plane-wave scenarios, which a box cannot hold.
bool exact_propagation(const ScenarioConfig& cfg) {
  const std::string& s = cfg.str("scenario");
  return s == "plane_wave" || s == "free_superposition";
}

EvolutionRecord exact_record(const ScenarioConfig& cfg) {
  const Grid1D g = grid_from(cfg);
  const PhysicalParams p = params_from(cfg);
  const double dt = cfg.num("dt") * static_cast<double>(cfg.count("stride"));
  const std::size_t count = cfg.count("nt") / std::max<std::size_t>(1, cfg.count("stride")) + 1;
  const double k = cfg.num("k"), A = cfg.num("A");
  EvolutionRecord rec;
  rec.dt = dt;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = dt * static_cast<double>(j);
    WaveFunction w = cfg.str("scenario") == "plane_wave" ? plane_wave(k, t, p, g) : free_superposition(k, A, t, p, g);
    if (cfg.str("scenario") == "plane_wave")
      for (cplx& z : w.field.values) z *= A;
    rec.snapshots.push_back({t, std::move(w)});
  }
  return rec;
}

//----------------------------------------------------------------------------------------------

void cmd_evolve(const ScenarioConfig& cfg, RunOutput& out) {
  EvolutionRecord rec = evolve_from(cfg);
  Rows psi_rows, norm_rows;
  const double n0 = discrete_norm(rec.snapshots.front().psi);
  double drift = 0.0;
  for (const Snapshot& s : rec.snapshots) {
    const Grid1D& g = s.psi.grid();
    for (std::size_t i = 0; i < g.n; ++i) {
      const cplx z = s.psi.field[i];
      psi_rows.push_back({s.t, g.x(i), z.real(), z.imag(), std::norm(z)});
    }
    const double nrm = discrete_norm(s.psi);
    drift = std::max(drift, std::abs(nrm - n0) / n0);
    norm_rows.push_back({s.t, nrm, s.psi.norm()});
  }
  out.csv("psi.csv", {"t", "x", "re", "im", "rho"}, psi_rows);
  out.csv("norm.csv", {"t", "discrete_norm", "trapezoid_norm"}, norm_rows);
  out.results()["snapshots"] = rec.size();
  out.results()["final_time"] = rec.snapshots.back().t;
  out.results()["norm_drift"] = drift;
  out.check("norm_drift", drift < 1e-7, drift, 1e-7);
}

void cmd_traj(const ScenarioConfig& cfg, RunOutput& out) {
  const bool exact = exact_propagation(cfg);
  EvolutionRecord rec = exact ? exact_record(cfg) : evolve_from(cfg);
  if (rec.size() < 2) throw ConfigError("trajectories need nt >= stride (at least two snapshots)");
  TrajectoryOptions topt;
  topt.substeps = cfg.count("substeps");
  if (topt.substeps == 0) throw ConfigError("key 'substeps' must be at least 1");
  const std::size_t particles = cfg.count("particles");
  if (particles == 0) throw ConfigError("key 'particles' must be at least 1");
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  EquivarianceResult er = equivariance_check(rec, particles, seed, thread_count(cfg), topt);

  VelocityField vf(rec, cfg.num("node_rel"));
  const std::size_t shown = std::min(cfg.count("traj_out"), particles);
  Rows rows;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < shown; ++k) {
    Trajectory tr = integrate_trajectory(vf, er.initial.particles[k], topt);
    hits += tr.hit_node ? 1 : 0;
    for (std::size_t j = 0; j < tr.times.size(); ++j)
      rows.push_back({static_cast<double>(k), tr.times[j], tr.positions[j]});
  }
  out.csv("trajectories.csv", {"id", "t", "x"}, rows);
  Rows fin;
  for (std::size_t k = 0; k < particles; ++k) fin.push_back({er.initial.particles[k], er.final_positions[k]});
  out.csv("ensemble.csv", {"x_initial", "x_final"}, fin);
  out.results()["propagation"] = exact ? "exact" : "crank_nicolson";
  out.results()["particles"] = particles;
  out.results()["ks_distance"] = er.ks;
  out.results()["node_hits"] = er.node_hits;
  out.results()["node_encountered"] = er.node_hits > 0 || hits > 0;
}

double sup_valid(const MaskedField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.mask[i]) m = std::max(m, std::abs(f[i]));
  return m;
}

void cmd_weyl(const ScenarioConfig& cfg, RunOutput& out) {
  const Grid1D g = grid_from(cfg);
  const PhysicalParams p = params_from(cfg);
  const double node_rel = cfg.num("node_rel");
  WaveFunction psi = initial_state(cfg, g);
  RealField rho = psi.density();
  const MetricDescriptor md;
  WeylVector phi = weyl_vector(rho, md, std::nullopt, node_rel);
  MaskedField curv = weyl_curvature(phi, md);
  MaskedField qw = q_from_curvature(curv, md, p);
  MaskedField qa = quantum_potential(to_polar(psi, node_rel), p);
  MaskedField res = weyl_identity_residual(rho, node_rel);
  Rows rows;
  for (std::size_t i = 0; i < g.n; ++i)
    rows.push_back({g.x(i), rho[i], phi.phi[i], curv.field[i], qw.field[i], qa.field[i], res.field[i],
                    valid_flag(res.mask, i)});
  out.csv("weyl.csv", {"x", "rho", "phi", "curvature", "q_weyl", "q_amplitude", "identity_residual", "valid"}, rows);

  const Grid1D fine(g.x0, 0.5 * g.dx, 2 * g.n - 1);
  const double r0 = sup_valid(res);
  const double r1 = sup_valid(weyl_identity_residual(initial_state(cfg, fine).density(), node_rel));
  out.csv("weyl_residuals.csv", {"dx", "max_residual"}, {{g.dx, r0}, {fine.dx, r1}});

  const std::size_t st = cfg.count("st_n");
  if (st < 8) throw ConfigError("key 'st_n' must be at least 8");
  Rows mrows;
  std::vector<double> mres;
  for (std::size_t n : {st, 2 * st - 1}) {
    SpacetimeField rh = travelling_gaussian(n, n);
    MinkowskiCurvature mc = minkowski_weyl_curvature(rh, 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < mc.curvature.values.size(); ++k)
      worst = std::max(worst, std::abs(mc.curvature.values[k] - mc.box_form.values[k]));
    mres.push_back(worst);
    mrows.push_back({static_cast<double>(n), rh.grid.spatial.dx, rh.grid.dt, worst});
  }
  out.csv("minkowski_residuals.csv", {"n", "dx", "dt", "max_residual"}, mrows);
  out.results()["identity_residual"] = {r0, r1};
  if (r1 > 0.0) out.results()["identity_ratio"] = r0 / r1;
  out.results()["minkowski_residual"] = mres;
  const double ratio = mres[0] / mres[1];
  out.results()["minkowski_ratio"] = ratio;
  out.check("minkowski_second_order", std::abs(ratio - 4.0) < 0.5, std::abs(ratio - 4.0), 0.5);
}

TimeFunction flux_function(const ScenarioConfig& cfg, const std::vector<double>& times) {
  const std::string& kind = cfg.str("f");
  const double v = cfg.num("f_value"), s = cfg.num("f_slope");
  if (kind == "zero") return TimeFunction::constant(0.0, times.size());
  if (kind == "const") return TimeFunction::constant(v, times.size());
  if (kind == "linear")
    return TimeFunction::sampled(times, [v, s](double t) { return v + s * t; }, [s](double) { return s; });
  throw ConfigError("unknown f kind '" + kind + "'");
}

void report_reconstruction(const ReconstructionResult& rr, RunOutput& out) {
  Rows rows;
  for (std::size_t j = 0; j < rr.times.size(); ++j) {
    const Grid1D& g = rr.R[j].grid;
    for (std::size_t i = 0; i < g.n; ++i)
      rows.push_back({rr.times[j], g.x(i), rr.R[j][i], rr.S_x[j].field[i], rr.S_t[j].field[i], rr.V_x[j].field[i],
                      rr.V[j].field[i], valid_flag(rr.V_x[j].mask, i)});
  }
  out.csv("reconstruction.csv", {"t", "x", "R", "S_x", "S_t", "V_x", "V", "valid"}, rows);
  ojson& r = out.results();
  r["spectral_defect"] = rr.spectral_defect;
  r["stationary_exception"] = rr.stationary_exception;
  r["max_dVx_dt"] = rr.max_dVx_dt;
  r["vx_scale"] = rr.vx_scale;
  r["continuity_residual"] = rr.continuity_residual;
  r["continuity_differential"] = rr.continuity_differential;
}

void cmd_invert(const ScenarioConfig& cfg, RunOutput& out) {
  ReconstructionOptions ropt;
  ropt.eps = cfg.num("eps");
  if (cfg.str("scenario") == "custom_csv") {
    if (cfg.str("q_csv").empty()) throw ConfigError("scenario custom_csv needs key 'q_csv'");
    const std::filesystem::path path = cfg.base_dir() / cfg.str("q_csv");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open Q profile " + path.string());
    TimeQProfile tq = read_qprofile_csv(in);
    out.results()["source"] = cfg.str("q_csv");
    if (tq.Q.size() == 1) {
      QProfile qp{tq.Q.front(), tq.params};
      AmplitudeSolution amp = solve_amplitude(qp);
      Rows rows;
      const Grid1D& g = qp.Q.grid;
      for (std::size_t i = 0; i < g.n; ++i) rows.push_back({g.x(i), qp.Q[i], amp.R[i], amp.signed_R[i], amp.Q_solved[i]});
      out.csv("amplitude.csv", {"x", "Q", "R", "signed_R", "Q_solved"}, rows);
      std::vector<double> times;
      const std::size_t nt = cfg.count("times");
      if (nt < 4) throw ConfigError("key 'times' must be at least 4");
      for (std::size_t j = 0; j < nt; ++j) times.push_back(cfg.num("t_span") * j / static_cast<double>(nt - 1));
      report_reconstruction(reconstruct_static(qp, amp, flux_function(cfg, times), times, ropt), out);
      out.results()["lambda0"] = amp.lambda0;
      out.results()["defect_over_scale"] = amp.defect / amp.scale;
    } else {
      ReconstructionResult rr = reconstruct_timedep(tq, flux_function(cfg, tq.times),
                                                    TimeFunction::constant(0.0, tq.times.size()), ropt,
                                                    thread_count(cfg));
      report_reconstruction(rr, out);
      const double scale = 4.0 / (tq.Q.front().grid.dx * tq.Q.front().grid.dx);
      out.results()["defect_over_scale"] = rr.spectral_defect / scale;
    }
    return;
  }

  const Grid1D g = grid_from(cfg);
  const PhysicalParams p = params_from(cfg);
  WaveFunction psi = initial_state(cfg, g);
  if (!psi.normalizable) throw ConfigError("invert needs a normalizable scenario or custom_csv");
  psi = psi.normalized();
  QProfile qp{fill_masked(quantum_potential(to_polar(psi, cfg.num("node_rel")), p)), p};
  {
    std::ostringstream os;
    write_qprofile(os, qp);
    out.text("q_profile.csv", os.str());
  }
  AmplitudeSolution amp = solve_amplitude(qp);
  RealField truth = psi.amplitude();
  double err = 0.0;
  Rows rows;
  for (std::size_t i = 0; i < g.n; ++i) {
    err = std::max(err, std::abs(amp.R[i] - truth[i]));
    rows.push_back({g.x(i), qp.Q[i], amp.R[i], amp.signed_R[i], amp.Q_solved[i], truth[i]});
  }
  out.csv("amplitude.csv", {"x", "Q", "R", "signed_R", "Q_solved", "R_forward"}, rows);
  std::vector<double> times;
  const std::size_t nt = cfg.count("times");
  if (nt < 4) throw ConfigError("key 'times' must be at least 4");
  for (std::size_t j = 0; j < nt; ++j) times.push_back(cfg.num("t_span") * j / static_cast<double>(nt - 1));
  report_reconstruction(reconstruct_static(qp, amp, flux_function(cfg, times), times, ropt), out);
  const double tol = cfg.num("tol_round_trip");
  out.results()["lambda0"] = amp.lambda0;
  out.results()["defect_over_scale"] = amp.defect / amp.scale;
  out.results()["round_trip_error"] = err;
  out.check("round_trip", err < tol, err, tol);
  out.check("spectral_defect", amp.defect / amp.scale < 1e-6, amp.defect / amp.scale, 1e-6);
}

void cmd_olavo(const ScenarioConfig& cfg, RunOutput& out) {
  const Grid1D g = grid_from(cfg);
  const PhysicalParams p = params_from(cfg);
  const double node_rel = cfg.num("node_rel");
  WaveFunction psi = initial_state(cfg, g);
  Rows crow, zrow;
  ojson skipped = ojson::array();
  for (double x : cfg.num_list("x_points")) {
    try {
      LogCurvature lc = log_zq_curvature(psi, x, node_rel);
      crow.push_back({x, lc.ladder[0], lc.ladder[1], lc.ladder[2], lc.raw[0], lc.raw[1], lc.raw[2], lc.extrapolated,
                      lc.target});
      std::vector<double> ds{0.0, lc.ladder[0], lc.ladder[1], lc.ladder[2]};
      CharacteristicFunction z = zq_from_psi(psi, x, ds);
      for (std::size_t l = 0; l < ds.size(); ++l) zrow.push_back({x, ds[l], z.value[l].real(), z.value[l].imag()});
    } catch (const Error& e) {
      skipped.push_back({{"x", x}, {"reason", e.what()}});
    }
  }
  out.csv("log_curvature.csv",
          {"x", "delta1", "delta2", "delta3", "raw1", "raw2", "raw3", "extrapolated", "grid_target"}, crow);
  out.csv("zq.csv", {"x", "delta", "re", "im"}, zrow);
  FluctuationReport fr = fluctuation_suite(psi.density(), p, node_rel);
  Rows frow;
  for (std::size_t i = 0; i < g.n; ++i)
    frow.push_back({g.x(i), fr.entropy[i], fr.gamma.field[i], fr.dx2.field[i], fr.dp2.field[i],
                    valid_flag(fr.dp2.mask, i)});
  out.csv("fluctuations.csv", {"x", "entropy", "gamma", "dx2", "dp2", "valid"}, frow);
  out.results()["skipped_points"] = skipped;
  out.results()["product_residual"] = fr.product_residual;
  out.results()["cross_check"] = fr.cross_check;
  out.results()["degenerate"] = fr.degenerate;
  out.check("uncertainty_product", fr.product_residual < 1e-12, fr.product_residual, 1e-12);
}

void cmd_uncertainty(const ScenarioConfig& cfg, RunOutput& out) {
  const std::vector<std::string> states = cfg.list("states");
  if (states.empty()) throw ConfigError("key 'states' lists no states");
  const auto& known = test_state_names();
  for (const std::string& s : states)
    if (std::find(known.begin(), known.end(), s) == known.end()) throw ConfigError("unknown state '" + s + "'");
  const Grid1D g = grid_from(cfg);
  const PhysicalParams p = params_from(cfg);
  Rows rows;
  for (const std::string& s : states) {
    UncertaintyReport u = exact_uncertainty(make_test_state(s, g, p));
    rows.push_back({s, u.mean_x, u.mean_p, u.dx2, u.dp2, u.dp2_classical, u.q_frak, u.dp2_q, u.heisenberg, u.fisher,
                    u.mean_neg_curvature, u.covariance, u.k_factor, u.robertson_margin});
    const double gap = std::abs(u.dp2 - u.dp2_q);
    out.check(s + "_decomposition", gap < 1e-6, gap, 1e-6);
    const double margin = u.heisenberg - 0.5 * p.hbar;
    out.check(s + "_heisenberg", margin > -1e-9, margin, -1e-9);
    if (s == "gaussian") out.check("gaussian_saturation", std::abs(margin) < 1e-6, std::abs(margin), 1e-6);
  }
  out.csv("uncertainty.csv",
          {"state", "mean_x", "mean_p", "dx2", "dp2", "dp2_classical", "q_frak", "dp2_decomposed", "dx_dp", "fisher",
           "mean_neg_curvature", "covariance", "k_factor", "robertson_margin"},
          rows);
  const double s = cfg.num("sigma");
  if (!(s > 0.0)) throw ConfigError("key 'sigma' must be positive");
  const Grid1D ga = Grid1D::span(-12.0 * s, 12.0 * s, 2401);
  RealField r = RealField::sample(
      ga, [s](double x) { return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi)); });
  CurvatureUncertainty cu = curvature_uncertainty(r, r, r, p.hbar);
  out.results()["curvature_uncertainty"] = {{"dq2", cu.dq2},
                                            {"mean_neg_curvature", cu.mean_neg_curvature},
                                            {"product", cu.product},
                                            {"bound", cu.bound},
                                            {"margin", cu.margin},
                                            {"heisenberg", cu.heisenberg}};
  out.check("curvature_margin", std::abs(cu.margin - 2.0) < 1e-6, cu.margin, 2.0);
}

int cmd_verify(const ScenarioConfig& cfg, RunOutput& out, const std::string& filter, ojson& timing) {
  CheckContext ctx;
  ctx.threads = thread_count(cfg);
  bool any = false;
  for (const CheckSpec& s : check_registry()) any = any || matches_filter(s, filter);
  if (!any) throw ConfigError("filter '" + filter + "' matches no check");
  std::vector<CheckResult> results = run_checks(filter, ctx);
  ojson report = ojson::array();
  ojson secs = ojson::object();
  for (const CheckResult& r : results) {
    report.push_back(r.to_json());
    secs[r.id] = r.seconds;
    const double value = r.conditions.empty() ? 0.0 : r.conditions.front().value;
    out.check(r.id + "_" + r.name, r.passed(), value, r.tolerance);
    std::printf("%s %-26s %s\n", r.id.c_str(), r.name.c_str(), r.passed() ? "PASS" : "FAIL");
    for (const Condition& c : r.conditions)
      if (!c.passed())
        std::printf("    %s: %s %s %s\n", c.label.c_str(), shortest(c.value).c_str(), c.below ? "not <" : "not >",
                    shortest(c.limit).c_str());
    if (!r.error.empty()) std::printf("    error: %s\n", r.error.c_str());
    if (!r.within_budget()) std::printf("    runtime budget %s s exceeded\n", shortest(r.budget_s).c_str());
  }
  std::fflush(stdout);
  out.json("verify_report.json", report);
  out.results()["filter"] = filter;
  out.results()["checks_run"] = results.size();
  timing["checks"] = secs;
  return out.all_passed() ? 0 : 1;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"evolve", "traj", "weyl", "invert", "olavo", "uncertainty", "verify"};
  return names;
}

int run_command(const CommandOptions& opt) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), opt.command) == names.end())
    throw ConfigError("unknown command '" + opt.command + "'");
  ScenarioConfig cfg = opt.config ? ScenarioConfig::load(*opt.config) : ScenarioConfig();
  const auto t0 = Clock::now();
  RunOutput out(opt.out, opt.command);
  ojson timing = ojson::object();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };
  try {
    int code = 0;
    if (opt.command == "verify") {
      code = cmd_verify(cfg, out, opt.filter, timing);
    } else {
      if (opt.command == "evolve") cmd_evolve(cfg, out);
      if (opt.command == "traj") cmd_traj(cfg, out);
      if (opt.command == "weyl") cmd_weyl(cfg, out);
      if (opt.command == "invert") cmd_invert(cfg, out);
      if (opt.command == "olavo") cmd_olavo(cfg, out);
      if (opt.command == "uncertainty") cmd_uncertainty(cfg, out);
      code = out.all_passed() ? 0 : 1;
    }
    out.finish(cfg, code == 0 ? "pass" : "fail", elapsed(), timing);
    return code;
  } catch (const std::exception& e) {
    out.results()["error"] = e.what();
    out.finish(cfg, "error", elapsed(), timing);
    throw;
  }
}

}  // namespace qlab::cli
