#pragma once

#include <array>
#include <functional>
#include <vector>

#include "qlab/wavefield.hpp"

namespace qlab {

// F(x, p) on a rectangular grid, row-major in x: values[i * np + k].
struct PhaseSpaceDistribution {
  Grid1D gx;
  Grid1D gp;
  std::vector<double> values;

  PhaseSpaceDistribution(const Grid1D& x, const Grid1D& p, std::vector<double> v);
  static PhaseSpaceDistribution sample(const Grid1D& x, const Grid1D& p, const std::function<double(double, double)>& fn);

  double at(std::size_t i, std::size_t k) const { return values[i * gp.n + k]; }
  double total() const;  // trapezoid over both axes
};

struct CharacteristicFunction {
  double x = 0.0;
  std::vector<double> delta;  // displacement or u samples
  std::vector<cplx> value;
};

// Z(x, d) = int F(x, p) exp(i p d / hbar) dp; F is interpolated linearly in x.
CharacteristicFunction wigner_moyal(const PhaseSpaceDistribution& F, double x, const std::vector<double>& deltas,
                                    double hbar);
// Z(x, d) = conj(psi(x - d/2)) psi(x + d/2) with cubic interpolation.
CharacteristicFunction zq_from_psi(const WaveFunction& psi, double x, const std::vector<double>& deltas);

struct Moments {
  RealField rho;     // int F dp
  MaskedField p;     // int p F dp / rho
  RealField M2;      // int p^2 F dp
};

Moments moments(const PhaseSpaceDistribution& F);

// M2(x) = -hbar^2 d^2 Z / d delta^2 at 0 from the ladder {dx, 2dx, 4dx} with Richardson extrapolation.
MaskedField m2_from_zq(const WaveFunction& psi);

struct LogCurvature {
  std::array<double, 3> ladder{};      // delta values
  std::array<double, 3> raw{};         // 2 (log|Z(delta)| - log|Z(0)|) / delta^2
  double extrapolated = 0.0;           // Richardson limit delta -> 0
  double target = 0.0;                 // (1/4) d^2 log rho at x from grid differences
};

LogCurvature log_zq_curvature(const WaveFunction& psi, double x, double node_rel = 1e-8);

struct FluctuationReport {
  RealField entropy;        // log rho with k_B = 1
  MaskedField gamma;        // (1/2) |d^2 entropy|
  MaskedField dx2;          // 1 / (2 gamma)
  MaskedField dp2;          // hbar^2 / (4 dx2)
  double product_residual = 0.0;   // max |dp2 dx2 - hbar^2/4| / (hbar^2/4)
  double cross_check = 0.0;        // max |dp2 - momentum fluctuation variance| where d^2 log rho < 0
  std::size_t degenerate = 0;      // samples where gamma vanishes (unbounded fluctuation)
};

FluctuationReport fluctuation_suite(const RealField& rho, const PhysicalParams& p, double node_rel = 1e-8);

struct FisherReport {
  double fisher = 0.0;        // int rho'^2 / rho
  double dx2 = 0.0;           // 1 / fisher
  double variance = 0.0;      // ordinary variance
  double cramer_rao = 0.0;    // variance * fisher, at least 1
};

FisherReport fisher_information(const RealField& rho);

struct UncertaintyReport {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double dx2 = 0.0;
  double dp2 = 0.0;            // from momentum-space moments
  double dp2_classical = 0.0;  // int rho (S_x - <S_x>)^2
  double q_frak = 0.0;         // int ((sqrt rho)')^2
  double dp2_q = 0.0;          // dp2_classical + hbar^2 q_frak
  double H_q = 0.0;            // comoving frame
  double K_q = 0.0;
  double fisher = 0.0;
  double mean_neg_curvature = 0.0;  // E[-R_w] = 2 fisher in 1-D
  double covariance = 0.0;          // int (x - <x>) (S_x - <S_x>) rho
  double k_factor = 0.0;            // 1 / sqrt(1 - r^2)
  double heisenberg = 0.0;          // sqrt(dx2 dp2)
  double robertson_margin = 0.0;    // dx2 dp2 - covariance^2 - hbar^2/4
};

UncertaintyReport exact_uncertainty(const WaveFunction& psi);

// Kinetic and quantum parts T = int rho S_x^2 / 2m, U = (hbar^2 / 2m) int ((sqrt rho)')^2.
struct GeneratorPair {
  double H = 0.0;  // T + U
  double K = 0.0;  // T - U
};

GeneratorPair generators(const RealField& rho, const RealField& S, const PhysicalParams& p);

struct DilationResult {
  RealField rho;
  RealField S;
  GeneratorPair before;
  GeneratorPair after;
  GeneratorPair mixed;  // (cosh H - sinh K, -sinh H + cosh K)
  double deviation = 0.0;  // max of the two component differences relative to |H|
};

// rho'(x) = e^{a/2} rho(e^{a/2} x), S'(x) = e^{-a} S(e^{a/2} x); samples outside the grid read rho = 0.
DilationResult dilation_transform(const RealField& rho, const RealField& S, double alpha, const PhysicalParams& p);

struct PairMap {
  double dx2 = 0.0;
  double dp2 = 0.0;
  double product = 0.0;
};

PairMap uncertainty_pair_map(double dx2, double dp2, double alpha, double hbar);

struct BracketReport {
  double s_H = 0.0;  // {s, H_q}
  double s_K = 0.0;  // {s, K_q}
  double s_s = 0.0;  // {s, s}
  GeneratorPair generators;
};

BracketReport s_generator_brackets(const RealField& rho, const RealField& S, const PhysicalParams& p);

struct CurvatureUncertainty {
  double dq2 = 0.0;                 // sum of the axis variances
  double mean_neg_curvature = 0.0;  // 2 sum E[phi_i^2]
  double product = 0.0;             // dq sqrt(E[-R])
  double bound = 0.0;               // 3 / sqrt 2
  double margin = 0.0;              // product / bound
  double p2_curvature = 0.0;        // (hbar^2 / 8) E[-R]
  double p2_density = 0.0;          // hbar^2 sum int ((sqrt rho_i)')^2
  double dp_bound = 0.0;            // hbar sqrt(E[-R]) / (2 sqrt 2)
  double heisenberg = 0.0;          // dq * sqrt(p2_density), at least 3 hbar / 2
};

CurvatureUncertainty curvature_uncertainty(const RealField& r1, const RealField& r2, const RealField& r3, double hbar);

struct InformaticsReport {
  CharacteristicFunction f;       // f(u) = int P(x) e^{iux} dx near u = 0
  double f0 = 0.0;                // |f(0)|
  double convolution_gap = 0.0;   // max |f(u) - int conj(psi~(k)) psi~(k - u) dk| over the samples
  double mean_x_from_f = 0.0;     // Im f'(0)
  double m2_from_f = 0.0;         // -Re f''(0)
  double mean_x = 0.0;
  double m2 = 0.0;                // int x^2 P
  double covariance = 0.0;
  double dx2 = 0.0;
  double dp2 = 0.0;
  double correlation = 0.0;       // r
  double k_factor = 0.0;
  double robertson_margin = 0.0;  // dx2 dp2 - cov^2 - hbar^2/4
};

InformaticsReport informatics_suite(const WaveFunction& psi, std::size_t u_samples = 5);

}  // namespace qlab
