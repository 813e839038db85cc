#include "qlab/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qlab {

PhysicalParams::PhysicalParams(double hbar_, double m_, double c_) : hbar(hbar_), m(m_), c(c_) {
  if (!(hbar > 0.0) || !(m > 0.0) || !(c > 0.0))
    throw Error(Errc::invalid_argument, "hbar, m and c must be positive");
}

WaveFunction::WaveFunction(ComplexField f, PhysicalParams p, double t_, bool normalizable_)
    : field(std::move(f)), params(p), t(t_), normalizable(normalizable_) {
  for (const cplx& z : field.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(Errc::invalid_argument, "wavefunction has non-finite samples");
}

double WaveFunction::norm() const { return integrate(density()); }

RealField WaveFunction::density() const {
  RealField out(field.grid);
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = std::norm(field[i]);
  return out;
}

RealField WaveFunction::amplitude() const {
  RealField out(field.grid);
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = std::abs(field[i]);
  return out;
}

WaveFunction WaveFunction::normalized() const {
  if (!normalizable) throw Error(Errc::invalid_argument, "state is flagged non-normalizable");
  const double nrm = norm();
  if (!(nrm > 0.0)) throw Error(Errc::invalid_argument, "zero wavefunction cannot be normalized");
  WaveFunction out = *this;
  const double s = 1.0 / std::sqrt(nrm);
  for (cplx& z : out.field.values) z *= s;
  return out;
}

//----------------------------------------------------------------------------------------------

PolarForm to_polar(const WaveFunction& psi, double node_rel) {
  if (!(node_rel > 0.0)) throw Error(Errc::invalid_argument, "node threshold must be positive");
  const ComplexField& f = psi.field;
  const std::size_t n = f.size();
  const double hbar = psi.params.hbar;
  PolarForm pf;
  pf.hbar = hbar;
  pf.R = RealField(f.grid);
  pf.S = RealField(f.grid);
  pf.node_mask.assign(n, false);

  double rmax = 0.0;
  std::size_t anchor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pf.R[i] = std::abs(f[i]);
    if (pf.R[i] > rmax) {
      rmax = pf.R[i];
      anchor = i;
    }
  }
  const double eps = node_rel * rmax;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    pf.node_mask[i] = !(pf.R[i] >= eps) || rmax == 0.0;
    any = any || !pf.node_mask[i];
  }
  if (!any) throw Error(Errc::all_masked, "amplitude below node threshold everywhere");

  // sign changes between samples
  Mask jump(n, false);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (pf.node_mask[i] || pf.node_mask[i + 1]) continue;
    if (std::abs(std::arg(f[i + 1] * std::conj(f[i]))) > 0.5 * std::numbers::pi) jump[i] = jump[i + 1] = true;
  }
  for (std::size_t i = 0; i < n; ++i) pf.node_mask[i] = pf.node_mask[i] || jump[i];
  if (pf.node_mask[anchor]) {
    // the maximum itself brackets a jump; fall back to the largest unmasked sample
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!pf.node_mask[i] && pf.R[i] > best) {
        best = pf.R[i];
        anchor = i;
      }
    if (best < 0.0) throw Error(Errc::all_masked, "amplitude below node threshold everywhere");
  }

  pf.S[anchor] = hbar * std::arg(f[anchor]);
  std::size_t last = anchor;
  for (std::size_t i = anchor + 1; i < n; ++i) {
    if (pf.node_mask[i]) continue;
    pf.S[i] = pf.S[last] + hbar * std::arg(f[i] * std::conj(f[last]));
    last = i;
  }
  last = anchor;
  for (std::size_t i = anchor; i-- > 0;) {
    if (pf.node_mask[i]) continue;
    pf.S[i] = pf.S[last] + hbar * std::arg(f[i] * std::conj(f[last]));
    last = i;
  }
  MaskedField tmp{pf.S, pf.node_mask};
  pf.S = fill_masked(tmp);
  return pf;
}

ComplexField from_polar(const PolarForm& pf) {
  ComplexField out(pf.grid());
  for (std::size_t i = 0; i < pf.size(); ++i) out[i] = std::polar(pf.R[i], pf.S[i] / pf.hbar);
  return out;
}

namespace {

Mask stencil_mask(const Mask& m) {
  const std::size_t n = m.size();
  Mask out(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i == 0 ? 0 : i - 1;
    std::size_t hi = i + 1 < n ? i + 1 : i;
    if (i == 0) hi = std::min<std::size_t>(2, n - 1);
    if (i + 1 == n) lo = n >= 3 ? n - 3 : 0;
    bool bad = false;
    for (std::size_t j = lo; j <= hi; ++j) bad = bad || m[j];
    out[i] = bad;
  }
  return out;
}

MaskedField q_from_amplitude(const RealField& R, const Mask& mask, const PhysicalParams& p) {
  RealField d2 = deriv2(R);
  MaskedField out{RealField(R.grid), mask};
  const double pref = -p.hbar * p.hbar / (2.0 * p.m);
  for (std::size_t i = 0; i < R.size(); ++i)
    if (!mask[i]) out.field[i] = pref * d2[i] / R[i];
  return out;
}

}  // namespace

Mask density_mask(const RealField& rho, double node_rel) {
  if (!(node_rel > 0.0)) throw Error(Errc::invalid_argument, "node threshold must be positive");
  double rmax = 0.0;
  for (double r : rho.values) {
    if (r < 0.0) throw Error(Errc::invalid_argument, "density must be nonnegative");
    rmax = std::max(rmax, std::sqrt(r));
  }
  Mask m(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) m[i] = !(std::sqrt(rho[i]) >= node_rel * rmax) || rmax == 0.0;
  return m;
}

MaskedField phase_gradient(const PolarForm& pf) {
  return MaskedField{deriv1(pf.S), stencil_mask(pf.node_mask)};
}

MaskedField quantum_potential(const PolarForm& pf, const PhysicalParams& p) {
  return q_from_amplitude(pf.R, pf.node_mask, p);
}

MaskedField quantum_potential_density(const RealField& rho, const PhysicalParams& p, double node_rel) {
  Mask m = density_mask(rho, node_rel);
  RealField sq(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) sq[i] = std::sqrt(rho[i]);
  return q_from_amplitude(sq, m, p);
}

namespace {

RealField safe_log(const RealField& rho, const Mask& m) {
  RealField out(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = m[i] ? 0.0 : std::log(rho[i]);
  // keep masked samples from injecting spurious gradients
  return fill_masked(MaskedField{out, m});
}

}  // namespace

MaskedField osmotic_velocity(const RealField& rho, const PhysicalParams& p, double node_rel) {
  Mask m = density_mask(rho, node_rel);
  RealField d = deriv1(safe_log(rho, m));
  for (double& v : d.values) v *= p.diffusion();
  return MaskedField{d, stencil_mask(m)};
}

MaskedField probability_current(const PolarForm& pf, const PhysicalParams& p) {
  MaskedField sx = phase_gradient(pf);
  for (std::size_t i = 0; i < pf.size(); ++i) sx.field[i] = pf.R[i] * pf.R[i] * sx.field[i] / p.m;
  return sx;
}

MaskedField momentum_fluctuation_variance(const RealField& rho, const PhysicalParams& p, double node_rel) {
  Mask m = density_mask(rho, node_rel);
  RealField d = deriv2(safe_log(rho, m));
  const double pref = -p.hbar * p.hbar / 4.0;
  for (double& v : d.values) v *= pref;
  return MaskedField{d, stencil_mask(m)};
}

RealField fill_masked(const MaskedField& f) {
  const std::size_t n = f.size();
  RealField out = f.field;
  std::size_t i = 0;
  long prev = -1;
  while (i < n) {
    if (!f.mask[i]) {
      prev = static_cast<long>(i);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && f.mask[j]) ++j;
    // run [i, j)
    for (std::size_t k = i; k < j; ++k) {
      if (prev < 0 && j >= n) {
        out[k] = 0.0;
      } else if (prev < 0) {
        out[k] = f.field[j];
      } else if (j >= n) {
        out[k] = f.field[static_cast<std::size_t>(prev)];
      } else {
        const double a = f.field[static_cast<std::size_t>(prev)], b = f.field[j];
        const double w = static_cast<double>(k - static_cast<std::size_t>(prev)) /
                         static_cast<double>(j - static_cast<std::size_t>(prev));
        out[k] = a + (b - a) * w;
      }
    }
    i = j;
  }
  return out;
}

double max_abs(const MaskedField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.mask[i]) m = std::max(m, std::abs(f.field[i]));
  return m;
}

}  // namespace qlab
