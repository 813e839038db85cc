#pragma once

#include <string>
#include <vector>

#include "qlab/wavefield.hpp"

namespace qlab {

struct Potential {
  RealField V;
  std::string label;
};

Potential zero_potential(const Grid1D& g);
Potential harmonic_potential(const Grid1D& g, double omega, const PhysicalParams& p);

struct Snapshot {
  double t = 0.0;
  WaveFunction psi;
};

struct EvolutionRecord {
  std::vector<Snapshot> snapshots;
  double dt = 0.0;  // spacing between stored snapshots

  std::size_t size() const { return snapshots.size(); }
  const Grid1D& grid() const { return snapshots.front().psi.grid(); }
};

// Crank-Nicolson with psi = 0 just outside the grid. Every `stride`-th step is stored.
EvolutionRecord propagate_cn(const WaveFunction& psi0, const Potential& V, double dt, std::size_t steps,
                             std::size_t stride = 1);

// Records built by sampling an exact solution psi(x, t).
template <class Fn>
EvolutionRecord analytic_record(const Grid1D& g, const PhysicalParams& p, double t0, double dt,
                                std::size_t count, Fn&& psi, bool normalizable = true) {
  EvolutionRecord rec;
  rec.dt = dt;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = t0 + static_cast<double>(j) * dt;
    ComplexField f = ComplexField::sample(g, [&](double x) { return psi(x, t); });
    rec.snapshots.push_back({t, WaveFunction(std::move(f), p, t, normalizable)});
  }
  return rec;
}

WaveFunction stationary_ho(int n, double omega, const PhysicalParams& p, const Grid1D& g);
// Exact energy-eigenstate time dependence exp(-i E t / hbar).
WaveFunction stationary_ho_at(int n, double omega, const PhysicalParams& p, const Grid1D& g, double t);
WaveFunction free_superposition(double k, double A, double t, const PhysicalParams& p, const Grid1D& g);
WaveFunction plane_wave(double k, double t, const PhysicalParams& p, const Grid1D& g);
// (2 pi sigma^2)^{-1/4} exp(-(x-xc)^2 / 4 sigma^2 + i k0 x), so rho has standard deviation sigma.
WaveFunction gaussian_packet(double xc, double sigma, double k0, const PhysicalParams& p, const Grid1D& g);

struct MadelungResiduals {
  std::vector<double> times;
  std::vector<MaskedField> hj;
  std::vector<MaskedField> cont;
  double max_hj = 0.0;
  double max_cont = 0.0;
};

struct ResidualOptions {
  double node_rel = 1e-8;
  // samples with rho below this fraction of max rho are left out of the reported maxima
  double bulk_rel = 0.0;
};

MadelungResiduals madelung_residuals(const EvolutionRecord& rec, const Potential& V, ResidualOptions opt = {});

struct EulerResidual {
  std::vector<double> times;
  std::vector<MaskedField> residual;
  double max_abs = 0.0;
};

EulerResidual euler_residual(const EvolutionRecord& rec, const Potential& V, ResidualOptions opt = {});

RealField pressure_field(const PolarForm& pf, const PhysicalParams& p);

}  // namespace qlab
