#pragma once

#include <string>
#include <vector>

#include "qlab/cli/config.hpp"
#include "qlab/evolve.hpp"

namespace qlab::cli {

// Named normalizable states used by the uncertainty command and the checks.
//   gaussian  real Gaussian, sigma = 1
//   boosted   Gaussian centred at 0.5, sigma = 0.8, wavenumber 1.5
//   chirped   Gaussian, sigma = 1, phase gamma x^2 / 2 hbar with gamma = 0.5
//   ho_mix    (psi_0 + 0.6 i psi_1) / |.| for the unit-frequency oscillator
//   sech      sech(x) exp(0.7 i x) / sqrt 2
const std::vector<std::string>& test_state_names();
WaveFunction make_test_state(const std::string& name, const Grid1D& g, const PhysicalParams& p);

PhysicalParams params_from(const ScenarioConfig& cfg);
Grid1D grid_from(const ScenarioConfig& cfg);
// Initial wave function of the configured scenario; custom_csv has none.
WaveFunction initial_state(const ScenarioConfig& cfg, const Grid1D& g);
Potential potential_from(const ScenarioConfig& cfg, const Grid1D& g);

// rho(t, x) = exp(-(x - t/2)^2 / 2w^2) / w with w = sqrt(1 + t^2/4) on [0, 2] x [-6, 6].
SpacetimeField travelling_gaussian(std::size_t nx, std::size_t nt);

}  // namespace qlab::cli
