#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "qlab/evolve.hpp"

namespace qlab {

struct Trajectory {
  std::vector<double> times;
  std::vector<double> positions;
  bool hit_node = false;

  // relativistic runs only
  std::vector<double> tau;
  std::vector<double> u0;
  std::vector<double> u1;
};

struct Ensemble {
  std::vector<double> particles;
  std::uint64_t seed = 0;
};

// Velocity samples for each snapshot of a record, prepared once and reused for many particles.
class VelocityField {
 public:
  explicit VelocityField(const EvolutionRecord& rec, double node_rel = 1e-8);

  const Grid1D& grid() const { return grid_; }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t slices() const { return v_.size(); }
  double operator()(double x, double t) const;
  bool in_node(double x, double t) const;

 private:
  Grid1D grid_;
  double t0_ = 0.0;
  double dt_ = 0.0;
  std::vector<std::vector<double>> v_;
  std::vector<Mask> node_;
};

struct TrajectoryOptions {
  std::size_t substeps = 1;  // RK4 steps per snapshot interval
};

Trajectory integrate_trajectory(const EvolutionRecord& rec, double x0, TrajectoryOptions opt = {});
Trajectory integrate_trajectory(const VelocityField& vf, double x0, TrajectoryOptions opt = {});

// Inverse-CDF sampling from a density on its grid.
Ensemble sample_density(const RealField& rho, std::size_t count, std::uint64_t seed);

struct EquivarianceResult {
  double ks = 0.0;
  std::size_t particles = 0;
  std::size_t node_hits = 0;
  Ensemble initial;
  std::vector<double> final_positions;
};

EquivarianceResult equivariance_check(const EvolutionRecord& rec, std::size_t count, std::uint64_t seed,
                                      unsigned threads = 1, TrajectoryOptions opt = {});

// Kolmogorov-Smirnov distance between a sample and the CDF of rho.
double ks_distance(std::vector<double> sample, const RealField& rho);

struct QuantumMass {
  RealField mass;         // m exp(Q/2)
  RealField omega_sq;     // exp(Q), the conformal factor
  RealField mass_sq_lin;  // m^2 (1 + Q)
};

QuantumMass quantum_mass_field(const RealField& q_rel, double m);

struct GeodesicOptions {
  double dtau = 1e-3;
  std::size_t steps = 1000;
  double c = 1.0;
};

// 1+1 D worldline in a static mass field, signature (+,-), x^0 = c t.
// u = (u^0, u^1) must satisfy (u^0)^2 - (u^1)^2 = c^2.
Trajectory relativistic_geodesic(const RealField& mass, double x0, std::array<double, 2> u, GeodesicOptions opt);
std::array<double, 2> timelike_velocity(double u1, double c);

using QFamily = std::function<RealField(double)>;
RealField floyd_mass(const QFamily& family, double m, double E, double dE);

}  // namespace qlab
