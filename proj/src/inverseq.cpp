#include "qlab/inverseq.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "qlab/format.hpp"

namespace qlab {

namespace {

struct Candidate {
  std::size_t index = 0;
  double value = 0.0;
  std::vector<double> vec;  // interior samples
};

SymTridiag amplitude_operator(const RealField& Q, const PhysicalParams& p) {
  const std::size_t n = Q.size();
  const double h2 = Q.grid.dx * Q.grid.dx;
  const double beta = p.beta();
  SymTridiag op;
  op.diag.resize(n - 2);
  op.off.assign(n - 3, 1.0 / h2);
  for (std::size_t i = 0; i + 2 < n; ++i) {
    if (!std::isfinite(Q[i + 1])) throw Error(Errc::invalid_argument, "Q must be finite");
    op.diag[i] = -2.0 / h2 + beta * Q[i + 1];
  }
  return op;
}

std::size_t nearest_zero_index(const SymTridiag& op) {
  const std::size_t k = sturm_count(op, 0.0);
  if (k == 0) return 0;
  if (k >= op.size()) return op.size() - 1;
  const double below = tridiag_eigenvalue(op, k - 1);
  const double above = tridiag_eigenvalue(op, k);
  return std::abs(above) <= std::abs(below) ? k : k - 1;
}

std::vector<Candidate> candidates(const SymTridiag& op, double dx, std::size_t radius) {
  const std::size_t k0 = nearest_zero_index(op);
  std::vector<Candidate> out;
  const std::size_t lo = k0 >= radius ? k0 - radius : 0;
  const std::size_t hi = std::min(op.size() - 1, k0 + radius);
  // nearest-zero candidate first
  std::vector<std::size_t> order{k0};
  for (std::size_t k = lo; k <= hi; ++k)
    if (k != k0) order.push_back(k);
  for (std::size_t k : order) {
    const double lam = tridiag_eigenvalue(op, k);
    out.push_back({k, lam, tridiag_eigenvector(op, lam, dx)});
  }
  return out;
}

AmplitudeSolution assemble(const QProfile& qp, const Candidate& c) {
  const Grid1D& g = qp.Q.grid;
  AmplitudeSolution s;
  s.signed_R = RealField(g, 0.0);
  s.R = RealField(g, 0.0);
  for (std::size_t i = 0; i < c.vec.size(); ++i) {
    s.signed_R[i + 1] = c.vec[i];
    s.R[i + 1] = std::abs(c.vec[i]);
  }
  s.lambda0 = c.value;
  s.defect = std::abs(c.value);
  s.scale = 4.0 / (g.dx * g.dx);
  s.Q_solved = qp.Q;
  const double shift_q = c.value / qp.params.beta();
  for (double& q : s.Q_solved.values) q -= shift_q;
  return s;
}

Mask amplitude_mask(const RealField& R, double eps) {
  double rmax = 0.0;
  for (double r : R.values) rmax = std::max(rmax, std::abs(r));
  Mask m(R.size());
  for (std::size_t i = 0; i < R.size(); ++i) m[i] = !(std::abs(R[i]) >= eps * rmax) || rmax == 0.0;
  return dilate(m, 1);
}

// Derivative along time of a stack of equally spaced slices.
std::vector<std::vector<double>> time_derivative(const std::vector<std::vector<double>>& s, double dt, bool second) {
  const std::size_t nt = s.size(), nx = s.front().size();
  std::vector<std::vector<double>> out(nt, std::vector<double>(nx));
  std::vector<double> series(nt);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nt; ++j) series[j] = s[j][i];
    std::vector<double> d = second ? deriv2(series, dt) : deriv1(series, dt);
    for (std::size_t j = 0; j < nt; ++j) out[j][i] = d[j];
  }
  return out;
}

struct SliceFields {
  MaskedField S_x, S_xt, V_x;
};

// V_x = -Q_x - (A / m R^4)(A_x - 2 A R_x / R) - (1 / R^2)(A_t - 2 A R_t / R), S_x = A / R^2.
SliceFields hj_kernel(const RealField& R, const std::vector<double>& R_t, const std::vector<double>& A,
                      const std::vector<double>& A_x, const std::vector<double>& A_t, const RealField& Q_x,
                      const Mask& mask, double m) {
  const Grid1D& g = R.grid;
  RealField R_x = deriv1(R);
  SliceFields out{{RealField(g), mask}, {RealField(g), mask}, {RealField(g), mask}};
  for (std::size_t i = 0; i < g.n; ++i) {
    if (mask[i]) continue;
    const double r = R[i], r2 = r * r;
    const double sx = A[i] / r2;
    const double sxt = (A_t[i] - 2.0 * A[i] * R_t[i] / r) / r2;
    const double conv = A[i] / (m * r2 * r2) * (A_x[i] - 2.0 * A[i] * R_x[i] / r);
    out.S_x.field[i] = sx;
    out.S_xt.field[i] = sxt;
    out.V_x.field[i] = -Q_x[i] - conv - sxt;
  }
  return out;
}

RealField q_derivative(const RealField& Q) { return deriv1(Q); }

double series_spacing(const std::vector<double>& times) {
  if (times.size() < 4) throw Error(Errc::too_few_points, "reconstruction needs at least 4 time samples");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "times must increase");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (std::abs(times[j] - times[j - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw Error(Errc::invalid_argument, "times must be equally spaced");
  return dt;
}

struct SliceInput {
  RealField R;
  std::vector<double> R_t, A, A_x, A_t;
  RealField Q, Q_x;
  double h = 0.0;
  double f = 0.0;
};

ReconstructionResult finish(const std::vector<double>& times, std::vector<SliceInput>& slices, double dt,
                            const TimeFunction& f, const PhysicalParams& p, const ReconstructionOptions& opt,
                            const std::vector<std::vector<double>>& rho_t, const std::vector<double>& fprime) {
  const std::size_t nt = slices.size();
  const Grid1D& g = slices.front().R.grid;
  const double x_ref = g.x0 + opt.x_ref_offset;
  ReconstructionResult out;
  out.times = times;
  out.f = f.values;
  std::vector<std::vector<double>> vx_values(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    SliceInput& s = slices[j];
    Mask mask = amplitude_mask(s.R, opt.eps);
    SliceFields k = hj_kernel(s.R, s.R_t, s.A, s.A_x, s.A_t, s.Q_x, mask, p.m);
    MaskedField V{cumint(fill_masked(k.V_x), x_ref), mask};
    for (std::size_t i = 0; i < g.n; ++i) V.field[i] += s.h;
    MaskedField S_t{RealField(g), mask};
    for (std::size_t i = 0; i < g.n; ++i)
      if (!mask[i])
        S_t.field[i] = -k.S_x.field[i] * k.S_x.field[i] / (2.0 * p.m) - s.Q[i] - V.field[i];

    // continuity in integrated and differential form
    RealField I = cumint(RealField(g, rho_t[j]), x_ref);
    RealField flux(g);
    for (std::size_t i = 0; i < g.n; ++i) flux[i] = s.R[i] * s.R[i] * k.S_x.field[i] / p.m;
    RealField dflux = deriv1(flux);
    Mask wide = dilate(mask, 1);
    for (std::size_t i = 0; i < g.n; ++i) {
      if (mask[i]) continue;
      out.continuity_residual = std::max(out.continuity_residual, std::abs(flux[i] + I[i] - s.f / p.m));
      if (!wide[i])
        out.continuity_differential = std::max(out.continuity_differential, std::abs(rho_t[j][i] + dflux[i]));
    }
    out.vx_scale = std::max(out.vx_scale, max_abs(k.V_x));
    vx_values[j] = k.V_x.field.values;
    out.R.push_back(s.R);
    out.S_x.push_back(std::move(k.S_x));
    out.S_t.push_back(std::move(S_t));
    out.V_x.push_back(std::move(k.V_x));
    out.V.push_back(std::move(V));
  }
  auto dvx = time_derivative(vx_values, dt, false);
  for (std::size_t j = 0; j < nt; ++j) {
    MaskedField d{RealField(g, dvx[j]), out.V_x[j].mask};
    // a sample is usable only if it is valid in every slice the difference touches
    const std::size_t lo = j == 0 ? 0 : j - 1, hi = std::min(nt - 1, j == 0 ? 2 : j + 1);
    for (std::size_t jj = lo; jj <= hi; ++jj)
      for (std::size_t i = 0; i < g.n; ++i) d.mask[i] = d.mask[i] || out.V_x[jj].mask[i];
    if (j + 1 == nt && nt >= 3)
      for (std::size_t i = 0; i < g.n; ++i) d.mask[i] = d.mask[i] || out.V_x[nt - 3].mask[i];
    for (std::size_t i = 0; i < g.n; ++i)
      if (d.mask[i]) d.field[i] = 0.0;
    out.max_dVx_dt = std::max(out.max_dVx_dt, max_abs(d));
    out.dVx_dt.push_back(std::move(d));
  }
  out.stationary_exception = std::all_of(fprime.begin(), fprime.end(), [](double v) { return v == 0.0; });
  return out;
}

}  // namespace

AmplitudeSolution solve_amplitude(const QProfile& qp) {
  SymTridiag op = amplitude_operator(qp.Q, qp.params);
  return assemble(qp, candidates(op, qp.Q.grid.dx, 0).front());
}

TimeFunction TimeFunction::constant(double v, std::size_t count) {
  TimeFunction f;
  f.values.assign(count, v);
  f.derivative = std::vector<double>(count, 0.0);
  return f;
}

TimeFunction TimeFunction::sampled(const std::vector<double>& times, const std::function<double(double)>& fn,
                                   const std::function<double(double)>& dfn) {
  TimeFunction f;
  for (double t : times) f.values.push_back(fn(t));
  if (dfn) {
    std::vector<double> d;
    for (double t : times) d.push_back(dfn(t));
    f.derivative = std::move(d);
  }
  return f;
}

std::vector<double> TimeFunction::diff(double dt) const {
  if (derivative) return *derivative;
  if (values.size() < 3) throw Error(Errc::too_few_points, "time derivative needs at least 3 samples");
  return deriv1(values, dt);
}

ReconstructionResult reconstruct_static(const QProfile& qp, const AmplitudeSolution& amp, const TimeFunction& f,
                                        const std::vector<double>& times, ReconstructionOptions opt) {
  const double dt = series_spacing(times);
  if (f.values.size() != times.size()) throw Error(Errc::invalid_argument, "f must have one sample per time");
  const Grid1D& g = qp.Q.grid;
  if (amp.R.size() != g.n) throw Error(Errc::invalid_argument, "amplitude grid mismatch");
  const std::vector<double> fp = f.diff(dt);
  const std::size_t nt = times.size();
  RealField qx = q_derivative(qp.Q);
  std::vector<SliceInput> slices(nt);
  std::vector<std::vector<double>> rho_t(nt, std::vector<double>(g.n, 0.0));
  for (std::size_t j = 0; j < nt; ++j) {
    SliceInput& s = slices[j];
    s.R = amp.R;
    s.Q = qp.Q;
    s.Q_x = qx;
    s.R_t.assign(g.n, 0.0);
    s.A.assign(g.n, f.values[j]);
    s.A_x.assign(g.n, 0.0);
    s.A_t.assign(g.n, fp[j]);
    s.f = f.values[j];
  }
  ReconstructionResult out = finish(times, slices, dt, f, qp.params, opt, rho_t, fp);
  out.spectral_defect = amp.defect;
  return out;
}

ReconstructionResult reconstruct_timedep(const TimeQProfile& qp, const TimeFunction& f, const TimeFunction& h,
                                         ReconstructionOptions opt, unsigned threads) {
  const double dt = series_spacing(qp.times);
  const std::size_t nt = qp.times.size();
  if (qp.Q.size() != nt) throw Error(Errc::invalid_argument, "one Q slice per time is required");
  if (f.values.size() != nt || h.values.size() != nt)
    throw Error(Errc::invalid_argument, "f and h must have one sample per time");
  const Grid1D& g = qp.Q.front().grid;
  for (const RealField& q : qp.Q)
    if (q.size() != g.n) throw Error(Errc::invalid_argument, "Q slices must share a grid");
  const PhysicalParams& p = qp.params;

  // independent per-slice eigen-solves
  std::vector<std::vector<Candidate>> cand(nt);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(nt)));
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t j = w; j < nt; j += threads)
        cand[j] = candidates(amplitude_operator(qp.Q[j], p), g.dx, 1);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // sequential branch tracking by overlap with the previous slice
  std::vector<AmplitudeSolution> amp(nt);
  std::vector<double> prev;
  double defect = 0.0;
  for (std::size_t j = 0; j < nt; ++j) {
    const Candidate* pick = &cand[j].front();
    double sign = 1.0;
    if (!prev.empty()) {
      double best = -1.0;
      for (const Candidate& c : cand[j]) {
        double ov = 0.0;
        for (std::size_t i = 0; i < c.vec.size(); ++i) ov += prev[i] * c.vec[i];
        ov *= g.dx;
        if (std::abs(ov) > best) {
          best = std::abs(ov);
          pick = &c;
          sign = ov < 0.0 ? -1.0 : 1.0;
        }
      }
      if (best < 0.9) throw Error(Errc::branch_switch, "eigenbranch overlap fell below 0.9");
    }
    Candidate chosen = *pick;
    for (double& v : chosen.vec) v *= sign;
    amp[j] = assemble(QProfile{qp.Q[j], p}, chosen);
    defect = std::max(defect, amp[j].defect);
    prev = chosen.vec;
  }

  std::vector<std::vector<double>> R(nt), rho(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    R[j] = amp[j].R.values;
    rho[j].resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) rho[j][i] = R[j][i] * R[j][i];
  }
  auto R_t = time_derivative(R, dt, false);
  auto rho_t = time_derivative(rho, dt, false);
  auto rho_tt = time_derivative(rho, dt, true);
  const std::vector<double> fp = f.diff(dt);
  const double x_ref = g.x0 + opt.x_ref_offset;

  std::vector<SliceInput> slices(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    SliceInput& s = slices[j];
    s.R = amp[j].R;
    s.Q = qp.Q[j];
    s.Q_x = q_derivative(qp.Q[j]);
    s.R_t = R_t[j];
    RealField I = cumint(RealField(g, rho_t[j]), x_ref);
    RealField It = cumint(RealField(g, rho_tt[j]), x_ref);
    s.A.resize(g.n);
    s.A_x.resize(g.n);
    s.A_t.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      s.A[i] = f.values[j] - p.m * I[i];
      s.A_x[i] = 0.0 - p.m * rho_t[j][i];
      s.A_t[i] = fp[j] - p.m * It[i];
    }
    s.h = h.values[j];
    s.f = f.values[j];
  }
  ReconstructionResult out = finish(qp.times, slices, dt, f, p, opt, rho_t, fp);
  out.spectral_defect = defect;
  return out;
}

//----------------------------------------------------------------------------------------------

namespace {

MaskedField q_of_amplitude(const RealField& R, const Mask& mask, const PhysicalParams& p) {
  RealField d2 = deriv2(R);
  MaskedField q{RealField(R.grid), mask};
  const double pref = -p.hbar * p.hbar / (2.0 * p.m);
  for (std::size_t i = 0; i < R.size(); ++i)
    if (!mask[i]) q.field[i] = pref * d2[i] / R[i];
  return q;
}

void stationary_core(const RealField& R, double c, const PhysicalParams& p, double eps, MaskedField& S_x,
                     MaskedField& Q) {
  Mask mask = amplitude_mask(R, eps);
  S_x = MaskedField{RealField(R.grid), mask};
  for (std::size_t i = 0; i < R.size(); ++i)
    if (!mask[i]) S_x.field[i] = c / (R[i] * R[i]);
  Q = q_of_amplitude(R, mask, p);
}

}  // namespace

StationaryFields stationary_energy(const RealField& R, double c, const RealField& V, const PhysicalParams& p,
                                   double eps) {
  if (V.size() != R.size()) throw Error(Errc::invalid_argument, "potential grid mismatch");
  StationaryFields out;
  MaskedField Q;
  stationary_core(R, c, p, eps, out.S_x, Q);
  out.out = MaskedField{RealField(R.grid), out.S_x.mask};
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (out.S_x.mask[i]) continue;
    const double sx = out.S_x.field[i];
    out.out.field[i] = sx * sx / (2.0 * p.m) + Q.field[i] + V[i];
    sum += out.out.field[i];
    ++cnt;
  }
  if (cnt == 0) throw Error(Errc::all_masked, "amplitude is masked everywhere");
  out.mean = sum / static_cast<double>(cnt);
  for (std::size_t i = 0; i < R.size(); ++i)
    if (!out.S_x.mask[i]) out.deviation = std::max(out.deviation, std::abs(out.out.field[i] - out.mean));
  return out;
}

StationaryFields stationary_potential(const RealField& R, double c, double E, const PhysicalParams& p, double eps) {
  StationaryFields out;
  MaskedField Q;
  stationary_core(R, c, p, eps, out.S_x, Q);
  out.out = MaskedField{RealField(R.grid), out.S_x.mask};
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (out.S_x.mask[i]) continue;
    const double sx = out.S_x.field[i];
    out.out.field[i] = E - sx * sx / (2.0 * p.m) - Q.field[i];
  }
  out.mean = E;
  return out;
}

EnergyReconstruction energy_reconstruction(const std::vector<RealField>& Rs, double dt, const TimeFunction& f,
                                           const PhysicalParams& p, double eps) {
  const std::size_t nt = Rs.size();
  if (nt < 4) throw Error(Errc::too_few_points, "energy reconstruction needs at least 4 time samples");
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be positive");
  if (f.values.size() != nt) throw Error(Errc::invalid_argument, "f must have one sample per time");
  const Grid1D& g = Rs.front().grid;
  std::vector<std::vector<double>> R(nt), rho(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    if (Rs[j].size() != g.n) throw Error(Errc::invalid_argument, "R slices must share a grid");
    R[j] = Rs[j].values;
    rho[j].resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) rho[j][i] = R[j][i] * R[j][i];
  }
  auto R_t = time_derivative(R, dt, false);
  auto rho_t = time_derivative(rho, dt, false);
  auto rho_tt = time_derivative(rho, dt, true);
  const std::vector<double> fp = f.diff(dt);
  EnergyReconstruction out;
  for (std::size_t j = 0; j < nt; ++j) {
    const RealField& Rj = Rs[j];
    Mask mask = amplitude_mask(Rj, eps);
    MaskedField Q = q_of_amplitude(Rj, mask, p);
    RealField Q_x = deriv1(fill_masked(Q));
    RealField I = cumint(RealField(g, rho_t[j]), g.x0);
    RealField It = cumint(RealField(g, rho_tt[j]), g.x0);
    std::vector<double> A(g.n), A_x(g.n), A_t(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      A[i] = f.values[j] - p.m * I[i];
      A_x[i] = 0.0 - p.m * rho_t[j][i];
      A_t[i] = fp[j] - p.m * It[i];
    }
    SliceFields k = hj_kernel(Rj, R_t[j], A, A_x, A_t, Q_x, mask, p.m);
    RealField R_x = deriv1(Rj);
    MaskedField E_x{RealField(g), mask}, S_xx{RealField(g), mask};
    for (std::size_t i = 0; i < g.n; ++i) {
      if (mask[i]) continue;
      const double r = Rj[i];
      E_x.field[i] = -Q_x[i] - k.S_xt.field[i];
      S_xx.field[i] = (A_x[i] - 2.0 * A[i] * R_x[i] / r) / (r * r);
    }
    out.S_x.push_back(std::move(k.S_x));
    out.E_x.push_back(std::move(E_x));
    out.S_xx.push_back(std::move(S_xx));
  }
  return out;
}

FluxReconstruction flux_reconstruction(const RealField& rho, const RealField& rho_t, double F, double x_ref,
                                       const PhysicalParams& p, double node_rel) {
  if (rho_t.size() != rho.size()) throw Error(Errc::invalid_argument, "rho_t grid mismatch");
  Mask mask = density_mask(rho, node_rel);
  RealField I = cumint(rho_t, x_ref);
  FluxReconstruction out{{RealField(rho.grid), mask}, 0.0};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (mask[i]) continue;
    out.S_x.field[i] = p.m * (F - I[i]) / rho[i];
  }
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (!mask[i]) out.residual = std::max(out.residual, std::abs(rho[i] * out.S_x.field[i] / p.m + I[i] - F));
  return out;
}

GaugeDifference gauge_freedom(const RealField& rho, const RealField& rho_t, double F, double F_hat, double x_ref,
                              const PhysicalParams& p, double node_rel) {
  FluxReconstruction a = flux_reconstruction(rho, rho_t, F, x_ref, p, node_rel);
  FluxReconstruction b = flux_reconstruction(rho, rho_t, F_hat, x_ref, p, node_rel);
  const Mask& mask = a.S_x.mask;
  const double gm = F_hat - F, gp = F_hat + F;
  GaugeDifference out{{RealField(rho.grid), mask}, {RealField(rho.grid), mask}, {RealField(rho.grid), mask}};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (mask[i]) continue;
    const double s = a.S_x.field[i], sh = b.S_x.field[i];
    out.dS_x.field[i] = p.m * gm / rho[i];
    out.dS_t.field[i] = -(sh * sh - s * s) / (2.0 * p.m);
    out.dS_t_closed.field[i] = -p.m * gm * gp / (2.0 * rho[i] * rho[i]);
  }
  const double scale = max_abs(out.dS_t);
  if (scale > 0.0) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (mask[i]) continue;
      const double sum = a.S_x.field[i] + b.S_x.field[i];
      const double id = out.dS_t.field[i] + out.dS_x.field[i] * sum / (2.0 * p.m);
      out.identity_residual = std::max(out.identity_residual, std::abs(id) / scale);
      out.closed_form_gap =
          std::max(out.closed_form_gap, std::abs(out.dS_t.field[i] - out.dS_t_closed.field[i]) / scale);
    }
  }
  return out;
}

//----------------------------------------------------------------------------------------------

RealField milne_amplitude(const Grid1D& g, const std::function<double(double)>& V, double E, double c,
                          const PhysicalParams& p, double R0, double dR0) {
  if (!(R0 > 0.0)) throw Error(Errc::invalid_argument, "initial amplitude must be positive");
  const double beta = p.beta();
  const double k = c * c / (p.hbar * p.hbar);
  auto acc = [&](double x, double r) { return beta * (V(x) - E) * r + k / (r * r * r); };
  RealField R(g);
  double r = R0, dr = dR0;
  R[0] = r;
  const double h = g.dx;
  for (std::size_t i = 0; i + 1 < g.n; ++i) {
    const double x = g.x(i);
    const double k1r = dr, k1v = acc(x, r);
    const double k2r = dr + 0.5 * h * k1v, k2v = acc(x + 0.5 * h, r + 0.5 * h * k1r);
    const double k3r = dr + 0.5 * h * k2v, k3v = acc(x + 0.5 * h, r + 0.5 * h * k2r);
    const double k4r = dr + h * k3v, k4v = acc(x + h, r + h * k3r);
    r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    dr += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(Errc::left_domain, "amplitude left the positive domain");
    R[i + 1] = r;
  }
  return R;
}

std::function<RealField(double)> stationary_q_family(const Grid1D& g, std::function<double(double)> V, double c,
                                                     const PhysicalParams& p, double R0, double dR0) {
  return [=](double E) {
    RealField R = milne_amplitude(g, V, E, c, p, R0, dR0);
    RealField Q(g);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double r2 = R[i] * R[i];
      Q[i] = E - V(g.x(i)) - c * c / (2.0 * p.m * r2 * r2);
    }
    return Q;
  };
}

//----------------------------------------------------------------------------------------------

namespace {

double parse_number(std::string_view s, const char* what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error(Errc::invalid_argument, std::string("bad number for ") + what + ": '" + std::string(s) + "'");
  return v;
}

}  // namespace

TimeQProfile read_qprofile_csv(std::istream& in) {
  std::string line;
  std::map<std::string, double> hdr;
  bool have_header = false;
  std::map<double, std::vector<std::pair<double, double>>> rows;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (have_header) continue;
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw Error(Errc::invalid_argument, "bad header token '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        if (key != "hbar" && key != "m" && key != "x0" && key != "dx" && key != "n" && key != "c")
          throw Error(Errc::invalid_argument, "unknown header key '" + key + "'");
        hdr[key] = parse_number(std::string_view(tok).substr(eq + 1), key.c_str());
      }
      have_header = true;
      continue;
    }
    if (!have_header) throw Error(Errc::invalid_argument, "Q profile header missing");
    std::vector<std::string_view> cols;
    std::string_view sv(line);
    while (true) {
      const auto comma = sv.find(',');
      cols.push_back(sv.substr(0, comma));
      if (comma == std::string_view::npos) break;
      sv.remove_prefix(comma + 1);
    }
    // skip a textual column-name line
    if (!cols.empty() && (cols[0] == "x" || cols[0] == " x")) continue;
    if (cols.size() != 2 && cols.size() != 3) throw Error(Errc::invalid_argument, "rows must be x,Q or x,t,Q");
    if (columns == 0) columns = cols.size();
    if (cols.size() != columns) throw Error(Errc::invalid_argument, "inconsistent column count");
    const double x = parse_number(cols[0], "x");
    const double t = columns == 3 ? parse_number(cols[1], "t") : 0.0;
    const double q = parse_number(cols.back(), "Q");
    rows[t].emplace_back(x, q);
  }
  for (const char* k : {"hbar", "m", "x0", "dx", "n"})
    if (!hdr.count(k)) throw Error(Errc::invalid_argument, std::string("header is missing ") + k);
  const double nd = hdr["n"];
  if (!(nd >= 8.0) || nd != std::floor(nd)) throw Error(Errc::invalid_argument, "header n must be an integer >= 8");
  Grid1D g(hdr["x0"], hdr["dx"], static_cast<std::size_t>(nd));
  TimeQProfile out;
  out.params = PhysicalParams(hdr["hbar"], hdr["m"], hdr.count("c") ? hdr["c"] : 1.0);
  if (rows.empty()) throw Error(Errc::invalid_argument, "Q profile has no rows");
  for (auto& [t, r] : rows) {
    if (r.size() != g.n) throw Error(Errc::invalid_argument, "row count does not match header n");
    std::sort(r.begin(), r.end());
    RealField q(g);
    for (std::size_t i = 0; i < g.n; ++i) {
      if (std::abs(r[i].first - g.x(i)) > 1e-6 * g.dx)
        throw Error(Errc::invalid_argument, "x column does not match the header grid");
      q[i] = r[i].second;
    }
    out.times.push_back(t);
    out.Q.push_back(std::move(q));
  }
  return out;
}

QProfile read_qprofile(std::istream& in) {
  TimeQProfile t = read_qprofile_csv(in);
  if (t.Q.size() != 1) throw Error(Errc::invalid_argument, "expected a static Q profile");
  return QProfile{std::move(t.Q.front()), t.params};
}

namespace {

void write_header(std::ostream& out, const PhysicalParams& p, const Grid1D& g) {
  out << "# hbar=" << shortest(p.hbar) << " m=" << shortest(p.m) << " c=" << shortest(p.c)
      << " x0=" << shortest(g.x0) << " dx=" << shortest(g.dx) << " n=" << g.n << "\n";
}

}  // namespace

void write_qprofile(std::ostream& out, const QProfile& qp) {
  const Grid1D& g = qp.Q.grid;
  write_header(out, qp.params, g);
  out << "x,Q\n";
  for (std::size_t i = 0; i < g.n; ++i) out << shortest(g.x(i)) << "," << shortest(qp.Q[i]) << "\n";
}

void write_qprofile(std::ostream& out, const TimeQProfile& qp) {
  if (qp.Q.empty()) throw Error(Errc::invalid_argument, "empty Q profile");
  const Grid1D& g = qp.Q.front().grid;
  write_header(out, qp.params, g);
  out << "x,t,Q\n";
  for (std::size_t j = 0; j < qp.Q.size(); ++j)
    for (std::size_t i = 0; i < g.n; ++i)
      out << shortest(g.x(i)) << "," << shortest(qp.times[j]) << "," << shortest(qp.Q[j][i]) << "\n";
}

}  // namespace qlab
