#pragma once

#include <optional>

#include "qlab/wavefield.hpp"

namespace qlab {

struct MetricDescriptor {
  int n = 3;
  std::optional<RealField> g;  // metric determinant samples; unset means g = 1

  double gamma() const { return 0.125 * (n - 2.0) / (n - 1.0); }
  double default_coefficient() const { return 1.0 / (n - 2.0); }
};

struct WeylVector {
  RealField phi;
  Mask mask;
  double coefficient = 1.0;
};

// phi = -coefficient * d log(rho / sqrt g). The coefficient defaults to 1/(n-2).
WeylVector weyl_vector(const RealField& rho, const MetricDescriptor& md,
                       std::optional<double> coefficient = std::nullopt, double node_rel = 1e-8);

// (n-1)[(n-2) phi^2 - 2 g^{-1/2} d(g^{1/2} phi)] plus an optional user-supplied background term.
MaskedField weyl_curvature(const WeylVector& phi, const MetricDescriptor& md,
                           const RealField* background = nullptr);

// (phi^2 - 2 d phi) - 4 d^2 sqrt(rho) / sqrt(rho) for phi = -d log rho; zero up to discretization.
MaskedField weyl_identity_residual(const RealField& rho, double node_rel = 1e-8);

MaskedField q_from_curvature(const MaskedField& curvature, const MetricDescriptor& md, const PhysicalParams& p);

struct MinkowskiCurvature {
  SpacetimeField curvature;    // -3[ (1/2) phi_mu phi^mu + d_mu phi^mu ]
  SpacetimeField alternative;  // -3[ 2 phi_mu phi^mu - 2 d_mu phi^mu ]
  SpacetimeField box_form;     // -6 box(sqrt rho) / sqrt rho
};

MinkowskiCurvature minkowski_weyl_curvature(const SpacetimeField& rho, double c = 1.0);

struct ConformalFactor {
  RealField exact;   // exp(Q)
  RealField linear;  // 1 + Q
};

ConformalFactor conformal_factor(const RealField& q);
// 1 + (hbar^2 / m^2 c^2) box(sqrt rho) / sqrt rho
SpacetimeField constraint_conformal_factor(const SpacetimeField& rho, const PhysicalParams& p);

struct CurvatureExpectation {
  double from_phi = 0.0;        // -2 int rho phi^2
  double from_curvature = 0.0;  // int rho R_w
};

CurvatureExpectation curvature_expectation(const RealField& rho, const MetricDescriptor& md, double node_rel = 1e-8);

// Separable 3-D product density, one factor per axis.
struct SeparableCurvature {
  double mean_phi_sq = 0.0;         // E|phi|^2
  double mean_neg_curvature = 0.0;  // E[-R_w] = 2 E|phi|^2
};

SeparableCurvature curvature_expectation_separable(const RealField& r1, const RealField& r2, const RealField& r3);

// Weyl gauge change phi -> phi + d Lambda, beta -> beta exp(-Lambda).
struct GaugePair {
  RealField phi;
  RealField beta;
};

GaugePair weyl_gauge_transform(const RealField& phi, const RealField& beta, const RealField& lambda);

}  // namespace qlab
