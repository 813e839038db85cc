#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qlab/wavefield.hpp"

namespace qlab {

struct QProfile {
  RealField Q;
  PhysicalParams params;
};

// Q sampled at a sequence of equally spaced times.
struct TimeQProfile {
  std::vector<double> times;
  std::vector<RealField> Q;
  PhysicalParams params;
};

struct AmplitudeSolution {
  RealField R;            // |v|, normalized so that int R^2 = 1, zero on the boundary
  RealField signed_R;     // the eigenvector itself, largest entry positive
  double lambda0 = 0.0;   // eigenvalue of d^2 + beta Q nearest zero
  double defect = 0.0;    // |lambda0|
  double scale = 0.0;     // operator scale 4 / dx^2
  RealField Q_solved;     // Q - lambda0 / beta, the potential R reproduces exactly
};

// Dirichlet eigenproblem (d^2 + beta Q) R = lambda R on the interior points, eigenvalue nearest
// zero. Passing Q_solved on to the reconstruction absorbs lambda0 into the energy reference.
AmplitudeSolution solve_amplitude(const QProfile& qp);

// Samples of f(t) at the reconstruction times, with an optional exact derivative.
struct TimeFunction {
  std::vector<double> values;
  std::optional<std::vector<double>> derivative;

  static TimeFunction constant(double v, std::size_t count);
  static TimeFunction sampled(const std::vector<double>& times, const std::function<double(double)>& f,
                              const std::function<double(double)>& df = {});
  // The exact derivative if given, otherwise second-order differences with spacing dt.
  std::vector<double> diff(double dt) const;
};

struct ReconstructionOptions {
  double eps = 1e-3;  // samples with R below eps * max R are masked
  double x_ref_offset = 0.0;  // flux reference point, measured from the left end of the grid
};

struct ReconstructionResult {
  std::vector<double> times;
  std::vector<RealField> R;
  double spectral_defect = 0.0;  // largest |lambda0| over the slices
  std::vector<double> f;
  std::vector<MaskedField> S_x;
  std::vector<MaskedField> S_t;
  std::vector<MaskedField> V_x;
  std::vector<MaskedField> V;
  std::vector<MaskedField> dVx_dt;  // time variation of V_x between samples
  double max_dVx_dt = 0.0;
  double vx_scale = 0.0;             // max |V_x| over all slices
  double continuity_residual = 0.0;  // max |rho S_x / m + int rho_t - f|
  double continuity_differential = 0.0;  // max |rho_t + (rho S_x / m)_x|, discretization limited
  bool stationary_exception = false;
};

// R is time independent; A = f(t).
ReconstructionResult reconstruct_static(const QProfile& qp, const AmplitudeSolution& amp, const TimeFunction& f,
                                        const std::vector<double>& times, ReconstructionOptions opt = {});

// R solved per slice with eigenbranch tracking; A = f(t) - m int rho_t dx.
ReconstructionResult reconstruct_timedep(const TimeQProfile& qp, const TimeFunction& f, const TimeFunction& h,
                                         ReconstructionOptions opt = {}, unsigned threads = 1);

struct StationaryFields {
  MaskedField S_x;
  MaskedField out;        // E(x) when V was given, V(x) when E was given
  double mean = 0.0;      // mean of E(x) over valid samples (given V)
  double deviation = 0.0; // max |E(x) - mean| over valid samples (given V)
};

// S_x = c / R^2 and c^2 / (2 m R^4) + Q + V = E.
StationaryFields stationary_energy(const RealField& R, double c, const RealField& V, const PhysicalParams& p,
                                   double eps = 1e-3);
StationaryFields stationary_potential(const RealField& R, double c, double E, const PhysicalParams& p,
                                      double eps = 1e-3);

struct EnergyReconstruction {
  std::vector<MaskedField> S_x;
  std::vector<MaskedField> E_x;
  std::vector<MaskedField> S_xx;
};

// S_t + Q + E = 0 with R^2 S_x = f - m int rho_t dx.
EnergyReconstruction energy_reconstruction(const std::vector<RealField>& R, double dt, const TimeFunction& f,
                                           const PhysicalParams& p, double eps = 1e-3);

struct GaugeDifference {
  MaskedField dS_x;         // m G_- / rho
  MaskedField dS_t;         // -(S^_x^2 - S_x^2) / 2m from the two reconstructions
  MaskedField dS_t_closed;  // -m G_- G_+ / (2 rho^2)
  double identity_residual = 0.0;  // max |dS_t + (1/2m) dS_x (S^_x + S_x)| / max |dS_t|
  double closed_form_gap = 0.0;    // max |dS_t - dS_t_closed| / max |dS_t|, zero when rho_t = 0
};

// Two phase reconstructions at one instant with flux constants F and F^ at x_ref.
GaugeDifference gauge_freedom(const RealField& rho, const RealField& rho_t, double F, double F_hat, double x_ref,
                              const PhysicalParams& p, double node_rel = 1e-8);

// Phase gradient from rho S_x / m + int_{x_ref}^x rho_t dx = F.
struct FluxReconstruction {
  MaskedField S_x;
  double residual = 0.0;
};

FluxReconstruction flux_reconstruction(const RealField& rho, const RealField& rho_t, double F, double x_ref,
                                       const PhysicalParams& p, double node_rel = 1e-8);

// Stationary amplitude from R'' = beta (V - E) R + c^2 / (hbar^2 R^3), integrated with RK4 from the left.
RealField milne_amplitude(const Grid1D& g, const std::function<double(double)>& V, double E, double c,
                          const PhysicalParams& p, double R0 = 1.0, double dR0 = 0.0);
// Q(x; E) = E - V - c^2 / (2 m R^4) on the Milne solution.
std::function<RealField(double)> stationary_q_family(const Grid1D& g, std::function<double(double)> V, double c,
                                                     const PhysicalParams& p, double R0 = 1.0, double dR0 = 0.0);

// CSV with header `# hbar=.. m=.. x0=.. dx=.. n=..` followed by `x,Q` rows, or `x,t,Q`
// rows grouped by t for a time-dependent profile.
TimeQProfile read_qprofile_csv(std::istream& in);
QProfile read_qprofile(std::istream& in);  // requires a single time slice
void write_qprofile(std::ostream& out, const QProfile& qp);
void write_qprofile(std::ostream& out, const TimeQProfile& qp);

}  // namespace qlab
