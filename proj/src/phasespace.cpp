#include "qlab/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlab/weylgeo.hpp"

namespace qlab {

namespace {

// Fourth-order central differences, second order in the two outermost points.
template <class T>
std::vector<T> d1_o4(const std::vector<T>& f, double h) {
  std::vector<T> out = deriv1(std::span<const T>(f), h);
  const std::size_t n = f.size();
  for (std::size_t i = 2; i + 2 < n; ++i)
    out[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
  return out;
}

template <class T>
std::vector<T> d2_o4(const std::vector<T>& f, double h) {
  std::vector<T> out = deriv2(std::span<const T>(f), h);
  const std::size_t n = f.size();
  for (std::size_t i = 2; i + 2 < n; ++i)
    out[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / (12.0 * h * h);
  return out;
}

double trap(const std::vector<double>& f, double h) { return integrate(std::span<const double>(f), h); }

std::vector<double> sqrt_of(const RealField& rho) {
  std::vector<double> r(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] < 0.0) throw Error(Errc::invalid_argument, "density must be nonnegative");
    r[i] = std::sqrt(rho[i]);
  }
  return r;
}

double richardson3(const std::array<double, 3>& c) {
  // c(h), c(2h), c(4h) with error a h^2 + b h^4
  const double r1 = (4.0 * c[0] - c[1]) / 3.0;
  const double r2 = (4.0 * c[1] - c[2]) / 3.0;
  return (16.0 * r1 - r2) / 15.0;
}

}  // namespace

//----------------------------------------------------------------------------------------------

PhaseSpaceDistribution::PhaseSpaceDistribution(const Grid1D& x, const Grid1D& p, std::vector<double> v)
    : gx(x), gp(p), values(std::move(v)) {
  if (values.size() != gx.n * gp.n) throw Error(Errc::invalid_argument, "phase-space sample count mismatch");
  for (double f : values)
    if (!(f >= 0.0) || !std::isfinite(f)) throw Error(Errc::invalid_argument, "F must be finite and nonnegative");
}

PhaseSpaceDistribution PhaseSpaceDistribution::sample(const Grid1D& x, const Grid1D& p,
                                                      const std::function<double(double, double)>& fn) {
  std::vector<double> v(x.n * p.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < p.n; ++k) v[i * p.n + k] = fn(x.x(i), p.x(k));
  return PhaseSpaceDistribution(x, p, std::move(v));
}

double PhaseSpaceDistribution::total() const {
  std::vector<double> rows(gx.n);
  for (std::size_t i = 0; i < gx.n; ++i)
    rows[i] = trap(std::vector<double>(values.begin() + i * gp.n, values.begin() + (i + 1) * gp.n), gp.dx);
  return trap(rows, gx.dx);
}

CharacteristicFunction wigner_moyal(const PhaseSpaceDistribution& F, double x, const std::vector<double>& deltas,
                                    double hbar) {
  if (!F.gx.contains(x)) throw Error(Errc::left_domain, "x outside the phase-space grid");
  const double s = (x - F.gx.x0) / F.gx.dx;
  std::size_t i0 = static_cast<std::size_t>(std::floor(s));
  if (i0 + 1 >= F.gx.n) i0 = F.gx.n - 2;
  const double w = s - static_cast<double>(i0);
  CharacteristicFunction out{x, deltas, {}};
  std::vector<double> re(F.gp.n), im(F.gp.n);
  for (double d : deltas) {
    for (std::size_t k = 0; k < F.gp.n; ++k) {
      const double f = (1.0 - w) * F.at(i0, k) + w * F.at(i0 + 1, k);
      const double ph = F.gp.x(k) * d / hbar;
      re[k] = f * std::cos(ph);
      im[k] = f * std::sin(ph);
    }
    out.value.emplace_back(trap(re, F.gp.dx), trap(im, F.gp.dx));
  }
  return out;
}

CharacteristicFunction zq_from_psi(const WaveFunction& psi, double x, const std::vector<double>& deltas) {
  const ComplexField& f = psi.field;
  CharacteristicFunction out{x, deltas, {}};
  for (double d : deltas) {
    const double a = x - 0.5 * d, b = x + 0.5 * d;
    if (!f.grid.contains(a) || !f.grid.contains(b)) throw Error(Errc::left_domain, "x +- delta/2 outside the grid");
    out.value.push_back(std::conj(interp_cubic(f, a)) * interp_cubic(f, b));
  }
  return out;
}

Moments moments(const PhaseSpaceDistribution& F) {
  Moments out{RealField(F.gx), {RealField(F.gx), Mask(F.gx.n, false)}, RealField(F.gx)};
  std::vector<double> a(F.gp.n), b(F.gp.n), c(F.gp.n);
  for (std::size_t i = 0; i < F.gx.n; ++i) {
    for (std::size_t k = 0; k < F.gp.n; ++k) {
      const double p = F.gp.x(k), f = F.at(i, k);
      a[k] = f;
      b[k] = p * f;
      c[k] = p * p * f;
    }
    out.rho[i] = trap(a, F.gp.dx);
    out.M2[i] = trap(c, F.gp.dx);
    if (out.rho[i] > 0.0)
      out.p.field[i] = trap(b, F.gp.dx) / out.rho[i];
    else
      out.p.mask[i] = true;
  }
  return out;
}

MaskedField m2_from_zq(const WaveFunction& psi) {
  const Grid1D& g = psi.grid();
  const double hbar = psi.params.hbar;
  MaskedField out{RealField(g), Mask(g.n, true)};
  const std::array<double, 3> ladder{g.dx, 2.0 * g.dx, 4.0 * g.dx};
  for (std::size_t i = 2; i + 2 < g.n; ++i) {
    const double x = g.x(i);
    CharacteristicFunction z = zq_from_psi(psi, x, {0.0, ladder[0], ladder[1], ladder[2]});
    const double z0 = z.value[0].real();
    std::array<double, 3> c{};
    // Z(-d) = conj Z(d), so the second difference only sees the real part
    for (std::size_t l = 0; l < 3; ++l) c[l] = -hbar * hbar * 2.0 * (z.value[l + 1].real() - z0) / (ladder[l] * ladder[l]);
    out.field[i] = richardson3(c);
    out.mask[i] = false;
  }
  return out;
}

LogCurvature log_zq_curvature(const WaveFunction& psi, double x, double node_rel) {
  const Grid1D& g = psi.grid();
  RealField rho = psi.density();
  Mask m = density_mask(rho, node_rel);
  const double s = (x - g.x0) / g.dx;
  const long inear = std::lround(s);
  if (inear < 0 || inear >= static_cast<long>(g.n)) throw Error(Errc::left_domain, "x outside the grid");
  const std::size_t ic = static_cast<std::size_t>(inear);
  for (std::size_t j = ic >= 3 ? ic - 3 : 0; j <= std::min(g.n - 1, ic + 3); ++j)
    if (m[j]) throw Error(Errc::invalid_argument, "x lies on a node");
  LogCurvature out;
  // even multiples of dx keep x +- delta/2 on grid points
  out.ladder = {2.0 * g.dx, 4.0 * g.dx, 8.0 * g.dx};
  CharacteristicFunction z = zq_from_psi(psi, x, {0.0, out.ladder[0], out.ladder[1], out.ladder[2]});
  const double l0 = std::log(std::abs(z.value[0]));
  for (std::size_t l = 0; l < 3; ++l)
    out.raw[l] = 2.0 * (std::log(std::abs(z.value[l + 1])) - l0) / (out.ladder[l] * out.ladder[l]);
  out.extrapolated = richardson3(out.raw);
  RealField lg(g);
  for (std::size_t i = 0; i < g.n; ++i) lg[i] = m[i] ? 0.0 : std::log(rho[i]);
  RealField d2 = deriv2(fill_masked(MaskedField{lg, m}));
  out.target = 0.25 * interp_cubic(d2, x);
  return out;
}

FluctuationReport fluctuation_suite(const RealField& rho, const PhysicalParams& p, double node_rel) {
  const Grid1D& g = rho.grid;
  Mask m = density_mask(rho, node_rel);
  FluctuationReport out;
  out.entropy = RealField(g);
  for (std::size_t i = 0; i < g.n; ++i) out.entropy[i] = m[i] ? 0.0 : std::log(rho[i]);
  out.entropy = fill_masked(MaskedField{out.entropy, m});
  RealField d2 = deriv2(out.entropy);
  Mask sm = dilate(m, 1);
  double emax = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    if (!m[i]) emax = std::max(emax, std::abs(out.entropy[i]));
  // curvature at rounding level counts as zero
  const double floor = 64.0 * 2.220446049250313e-16 * std::max(1.0, emax) / (g.dx * g.dx);
  MaskedField fluct = momentum_fluctuation_variance(rho, p, node_rel);
  const double target = 0.25 * p.hbar * p.hbar;
  out.gamma = MaskedField{RealField(g), sm};
  out.dx2 = MaskedField{RealField(g), sm};
  out.dp2 = MaskedField{RealField(g), sm};
  for (std::size_t i = 0; i < g.n; ++i) {
    if (sm[i]) continue;
    const double gam = 0.5 * std::abs(d2[i]);
    out.gamma.field[i] = gam;
    if (!(gam > floor)) {
      ++out.degenerate;
      out.dx2.mask[i] = out.dp2.mask[i] = true;
      continue;
    }
    out.dx2.field[i] = 1.0 / (2.0 * gam);
    out.dp2.field[i] = target / out.dx2.field[i];
    out.product_residual =
        std::max(out.product_residual, std::abs(out.dp2.field[i] * out.dx2.field[i] - target) / target);
    if (d2[i] < 0.0 && !fluct.mask[i])
      out.cross_check = std::max(out.cross_check, std::abs(out.dp2.field[i] - fluct.field[i]));
  }
  return out;
}

FisherReport fisher_information(const RealField& rho) {
  const Grid1D& g = rho.grid;
  std::vector<double> R = sqrt_of(rho);
  std::vector<double> dR = d1_o4(R, g.dx);
  std::vector<double> a(g.n), b(g.n), c(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    a[i] = 4.0 * dR[i] * dR[i];
    b[i] = g.x(i) * rho[i];
    c[i] = g.x(i) * g.x(i) * rho[i];
  }
  const double norm = integrate(rho);
  if (!(norm > 0.0)) throw Error(Errc::invalid_argument, "density has zero mass");
  FisherReport out;
  out.fisher = trap(a, g.dx) / norm;
  const double mx = trap(b, g.dx) / norm;
  out.variance = trap(c, g.dx) / norm - mx * mx;
  out.dx2 = 1.0 / out.fisher;
  out.cramer_rao = out.variance * out.fisher;
  return out;
}

//----------------------------------------------------------------------------------------------

namespace {

struct PsiParts {
  double norm = 0.0;
  double mean_x = 0.0, dx2 = 0.0;
  double mean_sx = 0.0;     // <S_x>
  double sx2 = 0.0;         // int rho S_x^2 / norm
  double xsx = 0.0;         // int x S_x rho / norm
  double q_frak = 0.0;      // int R'^2 / norm
};

PsiParts psi_parts(const WaveFunction& psi) {
  const Grid1D& g = psi.grid();
  const double hbar = psi.params.hbar;
  std::vector<cplx> dpsi = d1_o4(psi.field.values, g.dx);
  RealField rhof = psi.density();
  std::vector<double> R = sqrt_of(rhof);
  std::vector<double> dR = d1_o4(R, g.dx);
  double rmax = 0.0;
  for (double r : rhof.values) rmax = std::max(rmax, r);
  std::vector<double> n0(g.n), n1(g.n), n2(g.n), j0(g.n), j1(g.n), j2(g.n), q(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x(i), rho = rhof[i];
    const double flux = hbar * std::imag(std::conj(psi.field[i]) * dpsi[i]);  // rho S_x
    n0[i] = rho;
    n1[i] = x * rho;
    n2[i] = x * x * rho;
    j0[i] = flux;
    j1[i] = x * flux;
    j2[i] = rho > 1e-30 * rmax ? flux * flux / rho : 0.0;
    q[i] = dR[i] * dR[i];
  }
  PsiParts out;
  out.norm = trap(n0, g.dx);
  if (!(out.norm > 0.0)) throw Error(Errc::invalid_argument, "state has zero norm");
  out.mean_x = trap(n1, g.dx) / out.norm;
  out.dx2 = trap(n2, g.dx) / out.norm - out.mean_x * out.mean_x;
  out.mean_sx = trap(j0, g.dx) / out.norm;
  out.sx2 = trap(j2, g.dx) / out.norm;
  out.xsx = trap(j1, g.dx) / out.norm;
  out.q_frak = trap(q, g.dx) / out.norm;
  return out;
}

// <p> and <p^2> from the zero-padded transform.
std::pair<double, double> fourier_moments(const WaveFunction& psi) {
  ComplexField spectrum = dft(psi.field, 8 * next_pow2(psi.grid().n));
  const double hbar = psi.params.hbar;
  std::vector<double> a(spectrum.size()), b(spectrum.size()), c(spectrum.size());
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    const double p = hbar * spectrum.grid.x(j), w = std::norm(spectrum[j]);
    a[j] = w;
    b[j] = p * w;
    c[j] = p * p * w;
  }
  const double n = trap(a, spectrum.grid.dx);
  const double mp = trap(b, spectrum.grid.dx) / n;
  return {mp, trap(c, spectrum.grid.dx) / n - mp * mp};
}

}  // namespace

UncertaintyReport exact_uncertainty(const WaveFunction& psi) {
  const PhysicalParams& p = psi.params;
  PsiParts s = psi_parts(psi);
  UncertaintyReport out;
  out.mean_x = s.mean_x;
  out.mean_p = s.mean_sx;
  out.dx2 = s.dx2;
  out.dp2_classical = s.sx2 - s.mean_sx * s.mean_sx;
  out.q_frak = s.q_frak;
  out.dp2_q = out.dp2_classical + p.hbar * p.hbar * s.q_frak;
  const double T = out.dp2_classical / (2.0 * p.m);
  const double U = p.hbar * p.hbar * s.q_frak / (2.0 * p.m);
  out.H_q = T + U;
  out.K_q = T - U;
  out.dp2 = fourier_moments(psi).second;
  out.fisher = 4.0 * s.q_frak;
  out.mean_neg_curvature = 2.0 * out.fisher;
  out.covariance = s.xsx - s.mean_x * s.mean_sx;
  out.heisenberg = std::sqrt(out.dx2 * out.dp2);
  const double r2 = out.covariance * out.covariance / (out.dx2 * out.dp2);
  out.k_factor = 1.0 / std::sqrt(1.0 - r2);
  out.robertson_margin = out.dx2 * out.dp2 - out.covariance * out.covariance - 0.25 * p.hbar * p.hbar;
  return out;
}

GeneratorPair generators(const RealField& rho, const RealField& S, const PhysicalParams& p) {
  const Grid1D& g = rho.grid;
  if (S.size() != g.n) throw Error(Errc::invalid_argument, "phase grid mismatch");
  std::vector<double> R = sqrt_of(rho);
  std::vector<double> dR = d1_o4(R, g.dx);
  std::vector<double> dS = d1_o4(S.values, g.dx);
  std::vector<double> t(g.n), u(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    t[i] = rho[i] * dS[i] * dS[i];
    u[i] = dR[i] * dR[i];
  }
  const double T = trap(t, g.dx) / (2.0 * p.m);
  const double U = p.hbar * p.hbar * trap(u, g.dx) / (2.0 * p.m);
  return GeneratorPair{T + U, T - U};
}

DilationResult dilation_transform(const RealField& rho, const RealField& S, double alpha, const PhysicalParams& p) {
  const Grid1D& g = rho.grid;
  if (S.size() != g.n) throw Error(Errc::invalid_argument, "phase grid mismatch");
  const double s = std::exp(0.5 * alpha);
  DilationResult out{RealField(g), RealField(g), {}, {}, {}, 0.0};
  for (std::size_t i = 0; i < g.n; ++i) {
    const double y = s * g.x(i);
    if (g.contains(y)) {
      out.rho[i] = s * std::max(0.0, interp_cubic(rho, y));
      out.S[i] = std::exp(-alpha) * interp_cubic(S, y);
    } else {
      out.rho[i] = 0.0;
      out.S[i] = std::exp(-alpha) * interp_cubic(S, std::clamp(y, g.x0, g.xmax()));
    }
  }
  out.before = generators(rho, S, p);
  out.after = generators(out.rho, out.S, p);
  const double ch = std::cosh(alpha), sh = std::sinh(alpha);
  out.mixed = {ch * out.before.H - sh * out.before.K, -sh * out.before.H + ch * out.before.K};
  const double scale = std::abs(out.before.H);
  out.deviation = std::max(std::abs(out.after.H - out.mixed.H), std::abs(out.after.K - out.mixed.K)) / scale;
  return out;
}

PairMap uncertainty_pair_map(double dx2, double dp2, double alpha, double hbar) {
  if (!(dx2 > 0.0)) throw Error(Errc::invalid_argument, "position spread must be positive");
  PairMap out;
  out.dx2 = std::exp(-alpha) * dx2;
  out.dp2 = std::exp(-alpha) * dp2 + 0.25 * hbar * hbar * (std::exp(alpha) - std::exp(-alpha)) / dx2;
  out.product = out.dx2 * out.dp2;
  return out;
}

BracketReport s_generator_brackets(const RealField& rho, const RealField& S, const PhysicalParams& p) {
  const Grid1D& g = rho.grid;
  if (S.size() != g.n) throw Error(Errc::invalid_argument, "phase grid mismatch");
  std::vector<double> R = sqrt_of(rho);
  std::vector<double> d2R = d2_o4(R, g.dx);
  std::vector<double> dS = d1_o4(S.values, g.dx);
  std::vector<double> flux(g.n);
  for (std::size_t i = 0; i < g.n; ++i) flux[i] = rho[i] * dS[i];
  std::vector<double> dflux = d1_o4(flux, g.dx);
  const double pref = -p.hbar * p.hbar / (2.0 * p.m);
  // dH/dS = dK/dS = -(rho S_x)_x / m; dH/drho = S_x^2/2m + Q, dK/drho = S_x^2/2m - Q; ds/drho = S, ds/dS = rho
  std::vector<double> a(g.n), b(g.n), c(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double dGdS = -dflux[i] / p.m;
    const double kin = dS[i] * dS[i] / (2.0 * p.m);
    const double rhoQ = pref * R[i] * d2R[i];  // rho Q without dividing by R
    a[i] = S[i] * dGdS - (kin * rho[i] + rhoQ);
    b[i] = S[i] * dGdS - (kin * rho[i] - rhoQ);
    c[i] = S[i] * rho[i] - rho[i] * S[i];
  }
  BracketReport out;
  out.s_H = trap(a, g.dx);
  out.s_K = trap(b, g.dx);
  out.s_s = trap(c, g.dx);
  out.generators = generators(rho, S, p);
  return out;
}

CurvatureUncertainty curvature_uncertainty(const RealField& r1, const RealField& r2, const RealField& r3,
                                           double hbar) {
  CurvatureUncertainty out;
  SeparableCurvature sc = curvature_expectation_separable(r1, r2, r3);
  double qsum = 0.0;
  for (const RealField* r : {&r1, &r2, &r3}) {
    FisherReport f = fisher_information(*r);
    out.dq2 += f.variance;
    qsum += 0.25 * f.fisher;
  }
  out.mean_neg_curvature = sc.mean_neg_curvature;
  out.product = std::sqrt(out.dq2 * out.mean_neg_curvature);
  out.bound = 3.0 / std::numbers::sqrt2;
  out.margin = out.product / out.bound;
  out.p2_curvature = hbar * hbar * out.mean_neg_curvature / 8.0;
  out.p2_density = hbar * hbar * qsum;
  out.dp_bound = hbar * std::sqrt(out.mean_neg_curvature) / (2.0 * std::numbers::sqrt2);
  out.heisenberg = std::sqrt(out.dq2 * out.p2_density);
  return out;
}

//----------------------------------------------------------------------------------------------

InformaticsReport informatics_suite(const WaveFunction& psi, std::size_t u_samples) {
  if (u_samples < 2) throw Error(Errc::invalid_argument, "need at least 2 u samples");
  const Grid1D& g = psi.grid();
  const PhysicalParams& p = psi.params;
  const std::size_t npad = 8 * next_pow2(g.n);
  PsiParts s = psi_parts(psi);

  // f(u) = int P e^{iux} dx = sqrt(2 pi) Phat(-u)
  RealField P = psi.density();
  ComplexField Pc(g);
  for (std::size_t i = 0; i < g.n; ++i) Pc[i] = P[i] / s.norm;
  ComplexField Phat = dft(Pc, npad);
  ComplexField psihat = dft(psi.field, npad);
  const std::size_t N = Phat.size(), mid = N / 2;
  const double du = Phat.grid.dx;
  const double root2pi = std::sqrt(2.0 * std::numbers::pi);
  InformaticsReport out;
  out.f.x = 0.0;
  for (long j = -static_cast<long>(u_samples); j <= static_cast<long>(u_samples); ++j) {
    const std::size_t idx = static_cast<std::size_t>(static_cast<long>(mid) - j);
    const cplx fu = root2pi * Phat[idx];
    out.f.delta.push_back(static_cast<double>(j) * du);
    out.f.value.push_back(fu);
    cplx conv = 0.0;
    for (std::size_t l = 0; l < N; ++l) {
      const long src = static_cast<long>(l) - j;
      if (src < 0 || src >= static_cast<long>(N)) continue;
      conv += std::conj(psihat[l]) * psihat[static_cast<std::size_t>(src)];
    }
    conv *= du / s.norm;
    out.convolution_gap = std::max(out.convolution_gap, std::abs(fu - conv));
  }
  const std::size_t c = u_samples;  // index of u = 0
  out.f0 = std::abs(out.f.value[c]);
  // derivatives at 0 from steps du and 2du with Richardson
  auto fval = [&](long j) { return out.f.value[static_cast<std::size_t>(static_cast<long>(c) + j)]; };
  const cplx d1a = (fval(1) - fval(-1)) / (2.0 * du), d1b = (fval(2) - fval(-2)) / (4.0 * du);
  const cplx d2a = (fval(1) - 2.0 * fval(0) + fval(-1)) / (du * du);
  const cplx d2b = (fval(2) - 2.0 * fval(0) + fval(-2)) / (4.0 * du * du);
  out.mean_x_from_f = ((4.0 * d1a - d1b) / 3.0).imag();
  out.m2_from_f = -((4.0 * d2a - d2b) / 3.0).real();
  out.mean_x = s.mean_x;
  out.m2 = s.dx2 + s.mean_x * s.mean_x;
  out.dx2 = s.dx2;
  out.dp2 = fourier_moments(psi).second;
  out.covariance = s.xsx - s.mean_x * s.mean_sx;
  out.correlation = out.covariance / std::sqrt(out.dx2 * out.dp2);
  out.k_factor = 1.0 / std::sqrt(1.0 - out.correlation * out.correlation);
  out.robertson_margin = out.dx2 * out.dp2 - out.covariance * out.covariance - 0.25 * p.hbar * p.hbar;
  return out;
}

}  // namespace qlab
