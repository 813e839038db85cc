#include "qlab/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qlab {

Potential zero_potential(const Grid1D& g) { return Potential{RealField(g, 0.0), "zero"}; }

Potential harmonic_potential(const Grid1D& g, double omega, const PhysicalParams& p) {
  const double k = p.m * omega * omega;
  return Potential{RealField::sample(g, [&](double x) { return 0.5 * k * x * x; }), "harmonic"};
}

EvolutionRecord propagate_cn(const WaveFunction& psi0, const Potential& V, double dt, std::size_t steps,
                             std::size_t stride) {
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be positive");
  if (stride == 0) throw Error(Errc::invalid_argument, "stride must be positive");
  const Grid1D& g = psi0.grid();
  if (V.V.size() != g.n) throw Error(Errc::invalid_argument, "potential grid mismatch");
  const PhysicalParams& p = psi0.params;
  const std::size_t n = g.n;
  const double h2 = g.dx * g.dx;
  const cplx I(0.0, 1.0);
  const double kin = p.hbar * p.hbar / (2.0 * p.m * h2);
  // H = tridiag(-kin, 2 kin + V, -kin)
  const cplx off = I * dt / (2.0 * p.hbar) * (-kin);
  std::vector<cplx> lower(n, off), upper(n, off), diag(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = 1.0 + I * dt / (2.0 * p.hbar) * (2.0 * kin + V.V[i]);
  lower[0] = 0.0;
  upper[n - 1] = 0.0;

  EvolutionRecord rec;
  rec.dt = dt * static_cast<double>(stride);
  rec.snapshots.push_back({psi0.t, psi0});
  std::vector<cplx> psi = psi0.field.values;
  for (std::size_t s = 1; s <= steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      cplx hpsi = (2.0 * kin + V.V[i]) * psi[i];
      if (i > 0) hpsi -= kin * psi[i - 1];
      if (i + 1 < n) hpsi -= kin * psi[i + 1];
      rhs[i] = psi[i] - I * dt / (2.0 * p.hbar) * hpsi;
    }
    psi = solve_tridiag(lower, diag, upper, rhs);
    if (s % stride == 0) {
      const double t = psi0.t + static_cast<double>(s) * dt;
      rec.snapshots.push_back({t, WaveFunction(ComplexField(g, psi), p, t, psi0.normalizable)});
    }
  }
  return rec;
}

//----------------------------------------------------------------------------------------------

WaveFunction stationary_ho(int n, double omega, const PhysicalParams& p, const Grid1D& g) {
  return stationary_ho_at(n, omega, p, g, 0.0);
}

WaveFunction stationary_ho_at(int n, double omega, const PhysicalParams& p, const Grid1D& g, double t) {
  if (n < 0 || n > 20) throw Error(Errc::invalid_argument, "oscillator level must be in [0, 20]");
  if (!(omega > 0.0)) throw Error(Errc::invalid_argument, "omega must be positive");
  const double xi = std::sqrt(p.m * omega / p.hbar);
  RealField v(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double y = xi * g.x(i);
    double prev = 0.0;
    double cur = std::pow(xi * xi / std::numbers::pi, 0.25) * std::exp(-0.5 * y * y);
    for (int k = 0; k < n; ++k) {
      const double next = std::sqrt(2.0 / (k + 1.0)) * y * cur - std::sqrt(k / (k + 1.0)) * prev;
      prev = cur;
      cur = next;
    }
    v[i] = cur;
  }
  double nrm = 0.0;
  {
    RealField sq(g);
    for (std::size_t i = 0; i < g.n; ++i) sq[i] = v[i] * v[i];
    nrm = std::sqrt(integrate(sq));
  }
  const double energy = p.hbar * omega * (n + 0.5);
  const cplx phase = std::polar(1.0, -energy * t / p.hbar);
  ComplexField f(g);
  for (std::size_t i = 0; i < g.n; ++i) f[i] = phase * (v[i] / nrm);
  return WaveFunction(std::move(f), p, t, true);
}

WaveFunction free_superposition(double k, double A, double t, const PhysicalParams& p, const Grid1D& g) {
  const double e = p.hbar * k * k / (2.0 * p.m);
  ComplexField f = ComplexField::sample(g, [&](double x) {
    const cplx psi1 = A * std::polar(1.0, k * x - e * t);
    const cplx psi2 = A * std::polar(1.0, -k * x - e * t);
    return (psi1 + psi2) / std::numbers::sqrt2;
  });
  return WaveFunction(std::move(f), p, t, false);
}

WaveFunction plane_wave(double k, double t, const PhysicalParams& p, const Grid1D& g) {
  const double e = p.hbar * k * k / (2.0 * p.m);
  ComplexField f = ComplexField::sample(g, [&](double x) { return std::polar(1.0, k * x - e * t); });
  return WaveFunction(std::move(f), p, t, false);
}

WaveFunction gaussian_packet(double xc, double sigma, double k0, const PhysicalParams& p, const Grid1D& g) {
  if (!(sigma > 0.0)) throw Error(Errc::invalid_argument, "sigma must be positive");
  const double a = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  ComplexField f = ComplexField::sample(g, [&](double x) {
    const double d = x - xc;
    return a * std::exp(-d * d / (4.0 * sigma * sigma)) * std::polar(1.0, k0 * x);
  });
  return WaveFunction(std::move(f), p, 0.0, true).normalized();
}

//----------------------------------------------------------------------------------------------

namespace {

void exclude_thin(Mask& m, const RealField& rho, double bulk_rel) {
  if (bulk_rel <= 0.0) return;
  double mx = 0.0;
  for (double r : rho.values) mx = std::max(mx, r);
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho[i] < bulk_rel * mx) m[i] = true;
}

double masked_max(const MaskedField& f) { return max_abs(f); }

}  // namespace

MadelungResiduals madelung_residuals(const EvolutionRecord& rec, const Potential& V, ResidualOptions opt) {
  if (rec.size() < 3) throw Error(Errc::invalid_argument, "residuals need at least 3 snapshots");
  MadelungResiduals out;
  const Grid1D& g = rec.grid();
  const std::size_t n = g.n;
  const double dt2 = 2.0 * rec.dt;
  for (std::size_t j = 1; j + 1 < rec.size(); ++j) {
    const WaveFunction& prev = rec.snapshots[j - 1].psi;
    const WaveFunction& cur = rec.snapshots[j].psi;
    const WaveFunction& next = rec.snapshots[j + 1].psi;
    const PhysicalParams& p = cur.params;
    PolarForm pf = to_polar(cur, opt.node_rel);
    MaskedField sx = phase_gradient(pf);
    MaskedField q = quantum_potential(pf, p);
    RealField rho = cur.density();
    RealField flux(g);
    for (std::size_t i = 0; i < n; ++i) flux[i] = rho[i] * sx.field[i] / p.m;
    RealField dflux = deriv1(flux);

    MaskedField hj{RealField(g), Mask(n, false)};
    MaskedField cont{RealField(g), dilate(sx.mask, 1)};
    for (std::size_t i = 0; i < n; ++i) {
      // phase advance sampled pointwise, so no global unwrapping is needed in time
      const double st = p.hbar * std::arg(next.field[i] * std::conj(prev.field[i])) / dt2;
      const double rt = (std::norm(next.field[i]) - std::norm(prev.field[i])) / dt2;
      hj.mask[i] = sx.mask[i] || q.mask[i] || std::abs(prev.field[i]) == 0.0 || std::abs(next.field[i]) == 0.0;
      hj.field[i] = st + sx.field[i] * sx.field[i] / (2.0 * p.m) + V.V[i] + q.field[i];
      cont.field[i] = rt + dflux[i];
    }
    exclude_thin(hj.mask, rho, opt.bulk_rel);
    exclude_thin(cont.mask, rho, opt.bulk_rel);
    out.max_hj = std::max(out.max_hj, masked_max(hj));
    out.max_cont = std::max(out.max_cont, masked_max(cont));
    out.times.push_back(rec.snapshots[j].t);
    out.hj.push_back(std::move(hj));
    out.cont.push_back(std::move(cont));
  }
  return out;
}

EulerResidual euler_residual(const EvolutionRecord& rec, const Potential& V, ResidualOptions opt) {
  if (rec.size() < 3) throw Error(Errc::invalid_argument, "residuals need at least 3 snapshots");
  EulerResidual out;
  const Grid1D& g = rec.grid();
  const std::size_t n = g.n;
  RealField vx_pot = deriv1(V.V);
  auto velocity = [&](const WaveFunction& psi, Mask& mask) {
    PolarForm pf = to_polar(psi, opt.node_rel);
    MaskedField sx = phase_gradient(pf);
    mask = sx.mask;
    RealField v(g);
    for (std::size_t i = 0; i < n; ++i) v[i] = sx.field[i] / psi.params.m;
    return v;
  };
  for (std::size_t j = 1; j + 1 < rec.size(); ++j) {
    const WaveFunction& cur = rec.snapshots[j].psi;
    const PhysicalParams& p = cur.params;
    Mask mp, mc, mn;
    RealField vp = velocity(rec.snapshots[j - 1].psi, mp);
    RealField vc = velocity(cur, mc);
    RealField vn = velocity(rec.snapshots[j + 1].psi, mn);
    PolarForm pf = to_polar(cur, opt.node_rel);
    MaskedField q = quantum_potential(pf, p);
    RealField qx = deriv1(fill_masked(q));
    RealField vxx = deriv1(vc);
    MaskedField res{RealField(g), Mask(n, false)};
    Mask qm = dilate(q.mask, 1), vm = dilate(mc, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double vt = (vn[i] - vp[i]) / (2.0 * rec.dt);
      res.field[i] = p.m * vt + p.m * vc[i] * vxx[i] + vx_pot[i] + qx[i];
      res.mask[i] = mp[i] || mn[i] || qm[i] || vm[i];
    }
    exclude_thin(res.mask, cur.density(), opt.bulk_rel);
    out.max_abs = std::max(out.max_abs, masked_max(res));
    out.times.push_back(rec.snapshots[j].t);
    out.residual.push_back(std::move(res));
  }
  return out;
}

RealField pressure_field(const PolarForm& pf, const PhysicalParams& p) {
  MaskedField q = quantum_potential(pf, p);
  RealField qx = deriv1(fill_masked(q));
  Mask m = dilate(q.mask, 1);
  RealField integrand(pf.grid());
  for (std::size_t i = 0; i < pf.size(); ++i) integrand[i] = m[i] ? 0.0 : pf.R[i] * pf.R[i] * qx[i];
  return cumint(integrand, pf.grid().x0);
}

}  // namespace qlab
