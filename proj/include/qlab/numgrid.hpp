#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qlab/error.hpp"

namespace qlab {

using cplx = std::complex<double>;

// true marks a sample as not available
using Mask = std::vector<bool>;

struct Grid1D {
  double x0 = 0.0;
  double dx = 1.0;
  std::size_t n = 8;

  Grid1D() = default;
  Grid1D(double x0, double dx, std::size_t n);

  // n points from a to b inclusive
  static Grid1D span(double a, double b, std::size_t n);

  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double xmax() const { return x(n - 1); }
  double length() const { return xmax() - x0; }
  bool contains(double xv) const { return xv >= x0 && xv <= xmax(); }
  std::vector<double> points() const;
};

template <class T>
struct Field {
  Grid1D grid;
  std::vector<T> values;

  Field() = default;
  explicit Field(const Grid1D& g, T fill = T{}) : grid(g), values(g.n, fill) {}
  Field(const Grid1D& g, std::vector<T> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n) throw Error(Errc::invalid_argument, "field size does not match grid");
  }

  template <class Fn>
  static Field sample(const Grid1D& g, Fn&& fn) {
    Field out(g);
    for (std::size_t i = 0; i < g.n; ++i) out.values[i] = fn(g.x(i));
    return out;
  }

  std::size_t size() const { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

// A real field paired with a not-available mask.
struct MaskedField {
  RealField field;
  Mask mask;

  std::size_t size() const { return field.size(); }
  bool valid(std::size_t i) const { return !mask[i]; }
  double operator[](std::size_t i) const { return field[i]; }
};

enum class Signature { euclidean, minkowski };

struct SpacetimeGrid {
  Grid1D spatial;
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t nt = 4;
  Signature signature = Signature::minkowski;

  SpacetimeGrid() = default;
  SpacetimeGrid(const Grid1D& s, double t0, double dt, std::size_t nt, Signature sig);
  double t(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
};

// Row-major in time: values[j * nx + i] is (t_j, x_i).
struct SpacetimeField {
  SpacetimeGrid grid;
  std::vector<double> values;

  SpacetimeField() = default;
  explicit SpacetimeField(const SpacetimeGrid& g, double fill = 0.0)
      : grid(g), values(g.nt * g.spatial.n, fill) {}

  template <class Fn>
  static SpacetimeField sample(const SpacetimeGrid& g, Fn&& fn) {
    SpacetimeField out(g);
    for (std::size_t j = 0; j < g.nt; ++j)
      for (std::size_t i = 0; i < g.spatial.n; ++i) out.at(j, i) = fn(g.t(j), g.spatial.x(i));
    return out;
  }

  double& at(std::size_t j, std::size_t i) { return values[j * grid.spatial.n + i]; }
  double at(std::size_t j, std::size_t i) const { return values[j * grid.spatial.n + i]; }
  RealField slice(std::size_t j) const;
};

// Finite differences: central in the interior, one-sided second order at the ends.
std::vector<double> deriv1(std::span<const double> f, double dx);
std::vector<double> deriv2(std::span<const double> f, double dx);
std::vector<cplx> deriv1(std::span<const cplx> f, double dx);
std::vector<cplx> deriv2(std::span<const cplx> f, double dx);
RealField deriv1(const RealField& f);
RealField deriv2(const RealField& f);
ComplexField deriv1(const ComplexField& f);
ComplexField deriv2(const ComplexField& f);

// Composite trapezoid.
double integrate(std::span<const double> f, double dx);
double integrate(const RealField& f);
// F(x) = int_{x_ref}^x f, F(x_ref) = 0.
RealField cumint(const RealField& f, double x_ref);

// Thomas algorithm. lower[0] and upper[n-1] are ignored.
std::vector<double> solve_tridiag(std::span<const double> lower, std::span<const double> diag,
                                  std::span<const double> upper, std::span<const double> rhs);
std::vector<cplx> solve_tridiag(std::span<const cplx> lower, std::span<const cplx> diag,
                                std::span<const cplx> upper, std::span<const cplx> rhs);

struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;  // size n - 1

  std::size_t size() const { return diag.size(); }
  std::vector<double> apply(std::span<const double> v) const;
  double norm_inf() const;
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

// Number of eigenvalues strictly below x.
std::size_t sturm_count(const SymTridiag& op, double x);
// k-th smallest eigenvalue, k zero based.
double tridiag_eigenvalue(const SymTridiag& op, std::size_t k);
// Eigenvector for a converged eigenvalue; normalized so sum v^2 dx = 1, largest entry positive.
std::vector<double> tridiag_eigenvector(const SymTridiag& op, double lambda, double dx);
EigenPair eig_smallest_abs(const SymTridiag& op, double dx = 1.0);

// Unitary discrete transform, 1/sqrt(N) both ways. Input is zero padded to a power of two.
std::size_t next_pow2(std::size_t n);
std::vector<cplx> dft(std::span<const cplx> f);
std::vector<cplx> idft(std::span<const cplx> f);

// Continuous-normalized transform fhat(k) = (2 pi)^{-1/2} int f(x) e^{-ikx} dx on the
// centered wavenumber grid k_j = (j - N/2) dk, dk = 2 pi / (N dx).
ComplexField dft(const ComplexField& f);
ComplexField dft(const ComplexField& f, std::size_t padded_n);
// Inverse of the above, resampled onto xgrid (which must have the original spacing and origin).
ComplexField idft(const ComplexField& spectrum, const Grid1D& xgrid);

// Box operator d_t^2/c^2 - d_x^2.
SpacetimeField box_op(const SpacetimeField& f, double c = 1.0);
SpacetimeField deriv_t(const SpacetimeField& f);
SpacetimeField deriv_x(const SpacetimeField& f);
SpacetimeField deriv_tt(const SpacetimeField& f);
SpacetimeField deriv_xx(const SpacetimeField& f);

// Four-point Lagrange interpolation; the stencil is shifted inward near the ends.
template <class T>
T interp_cubic(std::span<const T> v, const Grid1D& g, double x) {
  const double s = (x - g.x0) / g.dx;
  long i = static_cast<long>(std::floor(s));
  const long n = static_cast<long>(v.size());
  long base = i - 1;
  if (base < 0) base = 0;
  if (base > n - 4) base = n - 4;
  const double u = s - static_cast<double>(base);
  // nodes at 0,1,2,3 relative to base
  const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
  const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
  const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
  return l0 * v[base] + l1 * v[base + 1] + l2 * v[base + 2] + l3 * v[base + 3];
}

template <class T>
T interp_cubic(const Field<T>& f, double x) {
  return interp_cubic<T>(std::span<const T>(f.values), f.grid, x);
}

// Grow masked runs by r points on each side.
Mask dilate(const Mask& m, std::size_t r);

}  // namespace qlab
