#include "qlab/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

namespace qlab {

VelocityField::VelocityField(const EvolutionRecord& rec, double node_rel) {
  if (rec.size() == 0) throw Error(Errc::invalid_argument, "empty evolution record");
  grid_ = rec.grid();
  t0_ = rec.snapshots.front().t;
  dt_ = rec.dt;
  const std::size_t n = grid_.n;
  for (const Snapshot& s : rec.snapshots) {
    PolarForm pf = to_polar(s.psi, node_rel);
    MaskedField sx = phase_gradient(pf);
    ComplexField dpsi = deriv1(s.psi.field);
    double rmax = 0.0;
    for (double r : pf.R.values) rmax = std::max(rmax, r);
    const double guard = std::pow(node_rel * rmax, 2);
    const double m = s.psi.params.m, hbar = s.psi.params.hbar;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!sx.mask[i]) {
        v[i] = sx.field[i] / m;
      } else {
        const cplx z = std::conj(s.psi.field[i]) * dpsi[i];
        v[i] = hbar / m * z.imag() / (std::norm(s.psi.field[i]) + guard);
      }
    }
    v_.push_back(std::move(v));
    node_.push_back(pf.node_mask);
  }
}

double VelocityField::operator()(double x, double t) const {
  const std::span<const double> a(v_.front());
  if (v_.size() == 1 || dt_ <= 0.0) return interp_cubic(a, grid_, x);
  double s = (t - t0_) / dt_;
  const double last = static_cast<double>(v_.size() - 1);
  s = std::clamp(s, 0.0, last);
  std::size_t j = static_cast<std::size_t>(std::floor(s));
  if (j >= v_.size() - 1) j = v_.size() - 2;
  const double w = s - static_cast<double>(j);
  const double va = interp_cubic(std::span<const double>(v_[j]), grid_, x);
  const double vb = interp_cubic(std::span<const double>(v_[j + 1]), grid_, x);
  return (1.0 - w) * va + w * vb;
}

bool VelocityField::in_node(double x, double t) const {
  std::size_t i = static_cast<std::size_t>(std::clamp(std::lround((x - grid_.x0) / grid_.dx), 0L,
                                                      static_cast<long>(grid_.n - 1)));
  std::size_t j = 0;
  if (v_.size() > 1 && dt_ > 0.0)
    j = static_cast<std::size_t>(std::clamp(std::lround((t - t0_) / dt_), 0L, static_cast<long>(v_.size() - 1)));
  return node_[j][i];
}

Trajectory integrate_trajectory(const EvolutionRecord& rec, double x0, TrajectoryOptions opt) {
  VelocityField vf(rec);
  return integrate_trajectory(vf, x0, opt);
}

Trajectory integrate_trajectory(const VelocityField& vf, double x0, TrajectoryOptions opt) {
  const Grid1D& g = vf.grid();
  if (!(x0 > g.x0 && x0 < g.xmax())) throw Error(Errc::left_domain, "start point outside grid interior");
  if (opt.substeps == 0) opt.substeps = 1;
  Trajectory tr;
  double x = x0, t = vf.t0();
  tr.times.push_back(t);
  tr.positions.push_back(x);
  if (vf.in_node(x, t)) {
    tr.hit_node = true;
    return tr;
  }
  const double h = vf.dt() / static_cast<double>(opt.substeps);
  for (std::size_t j = 1; j < vf.slices(); ++j) {
    for (std::size_t s = 0; s < opt.substeps; ++s) {
      const double k1 = vf(x, t);
      const double k2 = vf(x + 0.5 * h * k1, t + 0.5 * h);
      const double k3 = vf(x + 0.5 * h * k2, t + 0.5 * h);
      const double k4 = vf(x + h * k3, t + h);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
      if (!(x >= g.x0 && x <= g.xmax())) throw Error(Errc::left_domain, "trajectory left the grid");
    }
    t = vf.t0() + static_cast<double>(j) * vf.dt();
    tr.times.push_back(t);
    tr.positions.push_back(x);
    if (vf.in_node(x, t)) {
      tr.hit_node = true;
      break;
    }
  }
  return tr;
}

//----------------------------------------------------------------------------------------------

namespace {

std::vector<double> normalized_cdf(const RealField& rho) {
  RealField c = cumint(rho, rho.grid.x0);
  const double total = c.values.back();
  if (!(total > 0.0)) throw Error(Errc::invalid_argument, "density has zero mass");
  for (double& v : c.values) v /= total;
  return c.values;
}

double cdf_at(const std::vector<double>& cdf, const Grid1D& g, double x) {
  if (x <= g.x0) return 0.0;
  if (x >= g.xmax()) return 1.0;
  const double s = (x - g.x0) / g.dx;
  std::size_t i = std::min(static_cast<std::size_t>(s), g.n - 2);
  const double w = s - static_cast<double>(i);
  return cdf[i] + (cdf[i + 1] - cdf[i]) * w;
}

}  // namespace

Ensemble sample_density(const RealField& rho, std::size_t count, std::uint64_t seed) {
  std::vector<double> cdf = normalized_cdf(rho);
  const Grid1D& g = rho.grid;
  std::mt19937_64 rng(seed);
  Ensemble e;
  e.seed = seed;
  e.particles.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t i = static_cast<std::size_t>(std::max<long>(0, it - cdf.begin() - 1));
    i = std::min(i, g.n - 2);
    const double span = cdf[i + 1] - cdf[i];
    const double w = span > 0.0 ? std::clamp((u - cdf[i]) / span, 0.0, 1.0) : 0.5;
    e.particles.push_back(g.x(i) + w * g.dx);
  }
  return e;
}

double ks_distance(std::vector<double> sample, const RealField& rho) {
  if (sample.empty()) throw Error(Errc::invalid_argument, "empty sample");
  std::vector<double> cdf = normalized_cdf(rho);
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf_at(cdf, rho.grid, sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

EquivarianceResult equivariance_check(const EvolutionRecord& rec, std::size_t count, std::uint64_t seed,
                                      unsigned threads, TrajectoryOptions opt) {
  if (count == 0) throw Error(Errc::invalid_argument, "need at least one particle");
  EquivarianceResult out;
  out.particles = count;
  out.initial = sample_density(rec.snapshots.front().psi.density(), count, seed);
  VelocityField vf(rec);
  out.final_positions.assign(count, 0.0);
  std::vector<char> node(count, 0);
  threads = std::max(1u, threads);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w, std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t k = lo; k < hi; ++k) {
        Trajectory tr = integrate_trajectory(vf, out.initial.particles[k], opt);
        out.final_positions[k] = tr.positions.back();
        node[k] = tr.hit_node ? 1 : 0;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0, 0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, w, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (char c : node) out.node_hits += static_cast<std::size_t>(c);
  out.ks = ks_distance(out.final_positions, rec.snapshots.back().psi.density());
  return out;
}

//----------------------------------------------------------------------------------------------

QuantumMass quantum_mass_field(const RealField& q_rel, double m) {
  if (!(m > 0.0)) throw Error(Errc::invalid_argument, "mass must be positive");
  QuantumMass out{RealField(q_rel.grid), RealField(q_rel.grid), RealField(q_rel.grid)};
  for (std::size_t i = 0; i < q_rel.size(); ++i) {
    const double q = q_rel[i];
    if (!std::isfinite(q)) throw Error(Errc::invalid_argument, "quantum potential must be finite");
    out.omega_sq[i] = std::exp(q);
    out.mass[i] = m * std::exp(0.5 * q);
    out.mass_sq_lin[i] = m * m * (1.0 + q);
  }
  return out;
}

std::array<double, 2> timelike_velocity(double u1, double c) { return {std::sqrt(c * c + u1 * u1), u1}; }

Trajectory relativistic_geodesic(const RealField& mass, double x0, std::array<double, 2> u, GeodesicOptions opt) {
  const Grid1D& g = mass.grid;
  const double c2 = opt.c * opt.c;
  for (double v : mass.values)
    if (!(v > 0.0)) throw Error(Errc::invalid_argument, "mass field must be positive");
  if (std::abs(u[0] * u[0] - u[1] * u[1] - c2) > 1e-9 * c2 || u[0] <= 0.0)
    throw Error(Errc::invalid_argument, "initial velocity must be future timelike with norm c^2");
  if (!(x0 >= g.x0 && x0 <= g.xmax())) throw Error(Errc::left_domain, "start point outside grid");
  RealField logm(g);
  for (std::size_t i = 0; i < g.n; ++i) logm[i] = std::log(mass[i]);
  const RealField dlog = deriv1(logm);
  const std::span<const double> dl(dlog.values);

  using State = std::array<double, 4>;  // x^0, x^1, u^0, u^1
  auto rhs = [&](const State& y) {
    if (!(y[1] >= g.x0 && y[1] <= g.xmax())) throw Error(Errc::left_domain, "worldline left the grid");
    const double gr = interp_cubic(dl, g, y[1]);
    return State{y[2], y[3], -y[3] * y[2] * gr, (-c2 - y[3] * y[3]) * gr};
  };
  State y{0.0, x0, u[0], u[1]};
  Trajectory tr;
  double tau = 0.0;
  auto record = [&]() {
    tr.tau.push_back(tau);
    tr.times.push_back(y[0] / opt.c);
    tr.positions.push_back(y[1]);
    tr.u0.push_back(y[2]);
    tr.u1.push_back(y[3]);
  };
  record();
  for (std::size_t s = 0; s < opt.steps; ++s) {
    const double dx_est = std::abs(y[3]) * opt.dtau;
    const std::size_t sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dx_est / (0.25 * g.dx))));
    const double h = opt.dtau / static_cast<double>(sub);
    for (std::size_t k = 0; k < sub; ++k) {
      State k1 = rhs(y), y2, y3, y4;
      for (int a = 0; a < 4; ++a) y2[a] = y[a] + 0.5 * h * k1[a];
      State k2 = rhs(y2);
      for (int a = 0; a < 4; ++a) y3[a] = y[a] + 0.5 * h * k2[a];
      State k3 = rhs(y3);
      for (int a = 0; a < 4; ++a) y4[a] = y[a] + h * k3[a];
      State k4 = rhs(y4);
      for (int a = 0; a < 4; ++a) y[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    }
    tau += opt.dtau;
    if (!(y[1] >= g.x0 && y[1] <= g.xmax())) throw Error(Errc::left_domain, "worldline left the grid");
    const double drift = std::abs(y[2] * y[2] - y[3] * y[3] - c2) / c2;
    if (!(drift <= 1e-3)) throw Error(Errc::normalization_blowup, "velocity normalization drifted");
    record();
  }
  return tr;
}

RealField floyd_mass(const QFamily& family, double m, double E, double dE) {
  if (!(dE > 0.0)) throw Error(Errc::invalid_argument, "dE must be positive");
  RealField qp = family(E + dE);
  RealField qm = family(E - dE);
  if (qp.size() != qm.size()) throw Error(Errc::invalid_argument, "family grids differ");
  RealField out(qp.grid);
  for (std::size_t i = 0; i < qp.size(); ++i) out[i] = m * (1.0 - (qp[i] - qm[i]) / (2.0 * dE));
  return out;
}

}  // namespace qlab
