#pragma once

#include "qlab/numgrid.hpp"

namespace qlab {

struct PhysicalParams {
  double hbar = 1.0;
  double m = 1.0;
  double c = 1.0;

  PhysicalParams() = default;
  PhysicalParams(double hbar, double m, double c = 1.0);

  double beta() const { return 2.0 * m / (hbar * hbar); }
  double diffusion() const { return hbar / (2.0 * m); }
};

struct WaveFunction {
  ComplexField field;
  PhysicalParams params;
  double t = 0.0;
  bool normalizable = true;

  WaveFunction() = default;
  WaveFunction(ComplexField f, PhysicalParams p, double t = 0.0, bool normalizable = true);

  const Grid1D& grid() const { return field.grid; }
  double norm() const;  // trapezoid integral of |psi|^2
  RealField density() const;
  RealField amplitude() const;
  // Rescale so the norm is 1; throws for non-normalizable states.
  WaveFunction normalized() const;
};

struct PolarForm {
  RealField R;
  RealField S;
  Mask node_mask;
  double hbar = 1.0;

  std::size_t size() const { return R.size(); }
  const Grid1D& grid() const { return R.grid; }
};

// node_rel: masking threshold relative to max R. Points where the sampled phase jumps by more
// than pi/2 between neighbours bracket a zero crossing and are masked as well.
PolarForm to_polar(const WaveFunction& psi, double node_rel = 1e-8);
ComplexField from_polar(const PolarForm& pf);

// Phase gradient S_x; masked wherever the stencil touches a masked point.
MaskedField phase_gradient(const PolarForm& pf);

MaskedField quantum_potential(const PolarForm& pf, const PhysicalParams& p);
MaskedField quantum_potential_density(const RealField& rho, const PhysicalParams& p, double node_rel = 1e-8);
MaskedField osmotic_velocity(const RealField& rho, const PhysicalParams& p, double node_rel = 1e-8);
MaskedField probability_current(const PolarForm& pf, const PhysicalParams& p);
MaskedField momentum_fluctuation_variance(const RealField& rho, const PhysicalParams& p, double node_rel = 1e-8);

// Masked samples replaced by linear interpolation from valid neighbours, constant beyond the ends.
RealField fill_masked(const MaskedField& f);

// Largest |value| over valid samples.
double max_abs(const MaskedField& f);

Mask density_mask(const RealField& rho, double node_rel);

}  // namespace qlab
