#include "qlab/weylgeo.hpp"

#include <algorithm>
#include <cmath>

namespace qlab {

namespace {

void check_metric(const MetricDescriptor& md, const Grid1D& g) {
  if (md.n < 2) throw Error(Errc::invalid_argument, "dimension label must be at least 2");
  if (!md.g) return;
  if (md.g->size() != g.n) throw Error(Errc::invalid_argument, "metric grid mismatch");
  for (double v : md.g->values)
    if (!(v > 0.0)) throw Error(Errc::invalid_argument, "metric determinant must be positive");
}

double sqrt_g(const MetricDescriptor& md, std::size_t i) { return md.g ? std::sqrt((*md.g)[i]) : 1.0; }

}  // namespace

WeylVector weyl_vector(const RealField& rho, const MetricDescriptor& md, std::optional<double> coefficient,
                       double node_rel) {
  check_metric(md, rho.grid);
  double coef = 0.0;
  if (coefficient) {
    coef = *coefficient;
  } else {
    if (md.n == 2) throw Error(Errc::invalid_argument, "n = 2 needs an explicit coefficient");
    coef = md.default_coefficient();
  }
  Mask m = density_mask(rho, node_rel);
  RealField lg(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) lg[i] = m[i] ? 0.0 : std::log(rho[i] / sqrt_g(md, i));
  lg = fill_masked(MaskedField{lg, m});
  RealField d = deriv1(lg);
  for (double& v : d.values) v *= -coef;
  return WeylVector{d, dilate(m, 1), coef};
}

MaskedField weyl_curvature(const WeylVector& phi, const MetricDescriptor& md, const RealField* background) {
  const Grid1D& g = phi.phi.grid;
  check_metric(md, g);
  if (background && background->size() != g.n) throw Error(Errc::invalid_argument, "background grid mismatch");
  RealField w(g);
  for (std::size_t i = 0; i < g.n; ++i) w[i] = sqrt_g(md, i) * phi.phi[i];
  RealField dw = deriv1(w);
  const double n = md.n;
  MaskedField out{RealField(g), phi.mask.empty() ? Mask(g.n, false) : dilate(phi.mask, 1)};
  for (std::size_t i = 0; i < g.n; ++i) {
    const double f = phi.phi[i];
    double r = (n - 1.0) * ((n - 2.0) * f * f - 2.0 * dw[i] / sqrt_g(md, i));
    if (background) r += (*background)[i];
    out.field[i] = out.mask[i] ? 0.0 : r;
  }
  return out;
}

MaskedField weyl_identity_residual(const RealField& rho, double node_rel) {
  const MetricDescriptor md;
  WeylVector phi = weyl_vector(rho, md, std::nullopt, node_rel);
  RealField dphi = deriv1(phi.phi);
  Mask dm = density_mask(rho, node_rel);
  RealField sq(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) sq[i] = dm[i] ? 0.0 : std::sqrt(rho[i]);
  RealField lap = deriv2(sq);
  MaskedField out{RealField(rho.grid), dilate(phi.mask, 1)};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (out.mask[i]) continue;
    out.field[i] = phi.phi[i] * phi.phi[i] - 2.0 * dphi[i] - 4.0 * lap[i] / sq[i];
  }
  return out;
}

MaskedField q_from_curvature(const MaskedField& curvature, const MetricDescriptor& md, const PhysicalParams& p) {
  const double k = -md.gamma() * p.hbar * p.hbar / p.m;
  MaskedField out = curvature;
  for (std::size_t i = 0; i < out.size(); ++i) out.field[i] = out.mask[i] ? 0.0 : k * curvature.field[i];
  return out;
}

MinkowskiCurvature minkowski_weyl_curvature(const SpacetimeField& rho, double c) {
  if (rho.grid.signature != Signature::minkowski) throw Error(Errc::invalid_argument, "need a minkowski grid");
  if (!(c > 0.0)) throw Error(Errc::invalid_argument, "c must be positive");
  SpacetimeField lg(rho.grid), sq(rho.grid);
  for (std::size_t k = 0; k < rho.values.size(); ++k) {
    if (!(rho.values[k] > 0.0)) throw Error(Errc::invalid_argument, "density must be positive");
    lg.values[k] = std::log(rho.values[k]);
    sq.values[k] = std::sqrt(rho.values[k]);
  }
  // phi_0 = d_t log rho / c, phi_1 = d_x log rho; phi^0 = phi_0, phi^1 = -phi_1
  SpacetimeField lt = deriv_t(lg), lx = deriv_x(lg), ltt = deriv_tt(lg), lxx = deriv_xx(lg);
  SpacetimeField box = box_op(sq, c);
  MinkowskiCurvature out{SpacetimeField(rho.grid), SpacetimeField(rho.grid), SpacetimeField(rho.grid)};
  const double ic = 1.0 / c;
  for (std::size_t k = 0; k < rho.values.size(); ++k) {
    const double p0 = lt.values[k] * ic, p1 = lx.values[k];
    const double contract = p0 * p0 - p1 * p1;
    const double div = ltt.values[k] * ic * ic - lxx.values[k];
    out.curvature.values[k] = -3.0 * (0.5 * contract + div);
    out.alternative.values[k] = -3.0 * (2.0 * contract - 2.0 * div);
    out.box_form.values[k] = -6.0 * box.values[k] / sq.values[k];
  }
  return out;
}

ConformalFactor conformal_factor(const RealField& q) {
  ConformalFactor out{RealField(q.grid), RealField(q.grid)};
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) throw Error(Errc::invalid_argument, "quantum potential must be finite");
    out.exact[i] = std::exp(q[i]);
    out.linear[i] = 1.0 + q[i];
  }
  return out;
}

SpacetimeField constraint_conformal_factor(const SpacetimeField& rho, const PhysicalParams& p) {
  SpacetimeField sq(rho.grid);
  for (std::size_t k = 0; k < rho.values.size(); ++k) {
    if (!(rho.values[k] > 0.0)) throw Error(Errc::invalid_argument, "density must be positive");
    sq.values[k] = std::sqrt(rho.values[k]);
  }
  SpacetimeField box = box_op(sq, p.c);
  const double k = p.hbar * p.hbar / (p.m * p.m * p.c * p.c);
  for (std::size_t i = 0; i < box.values.size(); ++i) box.values[i] = 1.0 + k * box.values[i] / sq.values[i];
  return box;
}

CurvatureExpectation curvature_expectation(const RealField& rho, const MetricDescriptor& md, double node_rel) {
  WeylVector phi = weyl_vector(rho, md, std::nullopt, node_rel);
  MaskedField curv = weyl_curvature(phi, md);
  const Grid1D& g = rho.grid;
  RealField a(g), b(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    a[i] = phi.mask[i] ? 0.0 : rho[i] * phi.phi[i] * phi.phi[i];
    b[i] = curv.mask[i] ? 0.0 : rho[i] * curv.field[i];
  }
  const double n = md.n;
  // integrating rho d(phi) by parts gives (n-2) E[phi^2]
  return CurvatureExpectation{-(n - 1.0) * (n - 2.0) * integrate(a), integrate(b)};
}

SeparableCurvature curvature_expectation_separable(const RealField& r1, const RealField& r2, const RealField& r3) {
  MetricDescriptor md;  // n = 3
  SeparableCurvature out;
  for (const RealField* r : {&r1, &r2, &r3}) {
    CurvatureExpectation e = curvature_expectation(*r, md);
    out.mean_phi_sq += -0.5 * e.from_phi;
    out.mean_neg_curvature += -e.from_curvature;
  }
  return out;
}

GaugePair weyl_gauge_transform(const RealField& phi, const RealField& beta, const RealField& lambda) {
  if (phi.size() != lambda.size() || beta.size() != lambda.size())
    throw Error(Errc::invalid_argument, "gauge fields must share a grid");
  RealField dl = deriv1(lambda);
  GaugePair out{RealField(phi.grid), RealField(beta.grid)};
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out.phi[i] = phi[i] + dl[i];
    out.beta[i] = beta[i] * std::exp(-lambda[i]);
  }
  return out;
}

}  // namespace qlab
