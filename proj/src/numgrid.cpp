#include "qlab/numgrid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace qlab {

Grid1D::Grid1D(double x0_, double dx_, std::size_t n_) : x0(x0_), dx(dx_), n(n_) {
  if (!(dx > 0.0) || !std::isfinite(dx) || !std::isfinite(x0))
    throw Error(Errc::invalid_argument, "grid spacing must be positive and finite");
  if (n < 8) throw Error(Errc::too_few_points, "grid needs at least 8 points");
}

Grid1D Grid1D::span(double a, double b, std::size_t n) {
  if (n < 2) throw Error(Errc::too_few_points, "grid needs at least 8 points");
  return Grid1D(a, (b - a) / static_cast<double>(n - 1), n);
}

std::vector<double> Grid1D::points() const {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = x(i);
  return p;
}

SpacetimeGrid::SpacetimeGrid(const Grid1D& s, double t0_, double dt_, std::size_t nt_, Signature sig)
    : spatial(s), t0(t0_), dt(dt_), nt(nt_), signature(sig) {
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "time spacing must be positive");
  if (nt < 4) throw Error(Errc::too_few_points, "spacetime grid needs at least 4 time levels");
}

RealField SpacetimeField::slice(std::size_t j) const {
  const std::size_t nx = grid.spatial.n;
  return RealField(grid.spatial, std::vector<double>(values.begin() + j * nx, values.begin() + (j + 1) * nx));
}

//----------------------------------------------------------------------------------------------

namespace {

template <class T>
void d1_strided(const T* f, T* out, std::size_t n, std::size_t stride, double h) {
  if (n < 3) throw Error(Errc::too_few_points, "derivative needs at least 3 points");
  auto at = [&](std::size_t i) { return f[i * stride]; };
  const double inv = 1.0 / (2.0 * h);
  out[0] = (4.0 * (at(1) - at(0)) - (at(2) - at(0))) * inv;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i * stride] = (at(i + 1) - at(i - 1)) * inv;
  out[(n - 1) * stride] = (4.0 * (at(n - 1) - at(n - 2)) - (at(n - 1) - at(n - 3))) * inv;
}

template <class T>
void d2_strided(const T* f, T* out, std::size_t n, std::size_t stride, double h) {
  if (n < 3) throw Error(Errc::too_few_points, "derivative needs at least 3 points");
  auto at = [&](std::size_t i) { return f[i * stride]; };
  const double inv = 1.0 / (h * h);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i * stride] = (at(i + 1) - 2.0 * at(i) + at(i - 1)) * inv;
  if (n >= 4) {
    out[0] = (2.0 * (at(0) - at(1)) - 3.0 * (at(1) - at(2)) + (at(2) - at(3))) * inv;
    out[(n - 1) * stride] = (2.0 * (at(n - 1) - at(n - 2)) - 3.0 * (at(n - 2) - at(n - 3)) + (at(n - 3) - at(n - 4))) * inv;
  } else {
    out[0] = out[stride];
    out[2 * stride] = out[stride];
  }
}

template <class T>
std::vector<T> d1(std::span<const T> f, double dx) {
  std::vector<T> out(f.size());
  d1_strided(f.data(), out.data(), f.size(), 1, dx);
  return out;
}

template <class T>
std::vector<T> d2(std::span<const T> f, double dx) {
  std::vector<T> out(f.size());
  d2_strided(f.data(), out.data(), f.size(), 1, dx);
  return out;
}

}  // namespace

std::vector<double> deriv1(std::span<const double> f, double dx) { return d1(f, dx); }
std::vector<double> deriv2(std::span<const double> f, double dx) { return d2(f, dx); }
std::vector<cplx> deriv1(std::span<const cplx> f, double dx) { return d1(f, dx); }
std::vector<cplx> deriv2(std::span<const cplx> f, double dx) { return d2(f, dx); }

RealField deriv1(const RealField& f) {
  return RealField(f.grid, d1<double>(f.values, f.grid.dx));
}
RealField deriv2(const RealField& f) {
  return RealField(f.grid, d2<double>(f.values, f.grid.dx));
}
ComplexField deriv1(const ComplexField& f) {
  return ComplexField(f.grid, d1<cplx>(f.values, f.grid.dx));
}
ComplexField deriv2(const ComplexField& f) {
  return ComplexField(f.grid, d2<cplx>(f.values, f.grid.dx));
}

double integrate(std::span<const double> f, double dx) {
  if (f.empty()) return 0.0;
  if (f.size() == 1) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dx;
}

double integrate(const RealField& f) { return integrate(f.values, f.grid.dx); }

RealField cumint(const RealField& f, double x_ref) {
  const Grid1D& g = f.grid;
  if (!(x_ref >= g.x0 - 1e-12 * g.dx && x_ref <= g.xmax() + 1e-12 * g.dx))
    throw Error(Errc::invalid_argument, "cumint reference point outside grid");
  std::vector<double> acc(g.n, 0.0);
  for (std::size_t i = 1; i < g.n; ++i) acc[i] = acc[i - 1] + 0.5 * g.dx * (f[i - 1] + f[i]);
  double s = (x_ref - g.x0) / g.dx;
  std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, static_cast<double>(g.n - 2)));
  double frac = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
  double ref;
  if (frac == 0.0) {
    ref = acc[i];
  } else if (frac == 1.0) {
    ref = acc[i + 1];
  } else {
    const double h = frac * g.dx;
    const double fr = f[i] + (f[i + 1] - f[i]) * frac;
    ref = acc[i] + 0.5 * h * (f[i] + fr);
  }
  for (double& a : acc) a -= ref;
  return RealField(g, std::move(acc));
}

//----------------------------------------------------------------------------------------------

namespace {

template <class T>
std::vector<T> thomas(std::span<const T> a, std::span<const T> b, std::span<const T> c, std::span<const T> d) {
  const std::size_t n = b.size();
  if (a.size() != n || c.size() != n || d.size() != n)
    throw Error(Errc::invalid_argument, "tridiagonal bands must have equal length");
  if (n == 0) return {};
  std::vector<T> cp(n), dp(n);
  auto check = [](T piv, double scale) {
    if (!(std::abs(piv) > 1e-14 * scale)) throw Error(Errc::zero_pivot, "zero pivot in tridiagonal solve");
  };
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i]), std::abs(c[i])});
  if (scale == 0.0) throw Error(Errc::zero_pivot, "zero pivot in tridiagonal solve");
  T piv = b[0];
  check(piv, scale);
  cp[0] = c[0] / piv;
  dp[0] = d[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = b[i] - a[i] * cp[i - 1];
    check(piv, scale);
    cp[i] = (i + 1 < n) ? c[i] / piv : T{};
    dp[i] = (d[i] - a[i] * dp[i - 1]) / piv;
  }
  std::vector<T> x(n);
  x[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

}  // namespace

std::vector<double> solve_tridiag(std::span<const double> lower, std::span<const double> diag,
                                  std::span<const double> upper, std::span<const double> rhs) {
  return thomas(lower, diag, upper, rhs);
}

std::vector<cplx> solve_tridiag(std::span<const cplx> lower, std::span<const cplx> diag,
                                std::span<const cplx> upper, std::span<const cplx> rhs) {
  return thomas(lower, diag, upper, rhs);
}

//----------------------------------------------------------------------------------------------

std::vector<double> SymTridiag::apply(std::span<const double> v) const {
  const std::size_t n = diag.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * v[i];
    if (i > 0) s += off[i - 1] * v[i - 1];
    if (i + 1 < n) s += off[i] * v[i + 1];
    out[i] = s;
  }
  return out;
}

double SymTridiag::norm_inf() const {
  double m = 0.0;
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = std::abs(diag[i]);
    if (i > 0) s += std::abs(off[i - 1]);
    if (i + 1 < n) s += std::abs(off[i]);
    m = std::max(m, s);
  }
  return m;
}

namespace {

void check_op(const SymTridiag& op) {
  if (op.diag.empty()) throw Error(Errc::invalid_argument, "empty operator");
  if (op.off.size() + 1 != op.diag.size()) throw Error(Errc::invalid_argument, "off-diagonal size must be n-1");
  if (op.diag.size() > 4096) throw Error(Errc::invalid_argument, "eigen-solve limited to n <= 4096");
}

// LU with partial pivoting of (T - shift I); the factor has two super-diagonals.
struct TridiagLU {
  std::vector<double> dl, d, du, du2;
  std::vector<std::size_t> ipiv;

  TridiagLU(const SymTridiag& op, double shift) {
    const std::size_t n = op.size();
    d.resize(n);
    dl.assign(n > 1 ? n - 1 : 0, 0.0);
    du.assign(n > 1 ? n - 1 : 0, 0.0);
    du2.assign(n > 2 ? n - 2 : 0, 0.0);
    ipiv.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = op.diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) dl[i] = du[i] = op.off[i];
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(op.norm_inf(), 1e-300);
    for (std::size_t i = 0; i < n; ++i) ipiv[i] = i;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        ipiv[i] = i + 1;
      }
    }
    if (n > 0 && d[n - 1] == 0.0) d[n - 1] = tiny;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(d[i]) < tiny) d[i] = d[i] < 0 ? -tiny : tiny;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (ipiv[i] == i) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    if (n < 3) return;
    for (std::size_t i = n - 2; i-- > 0;) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  }
};

// Operators act on interior unknowns of a Dirichlet problem, so the embedded trapezoid
// rule reduces to a plain sum.
double sum_norm2(const std::vector<double>& v, double dx) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return s * dx;
}

}  // namespace

std::size_t sturm_count(const SymTridiag& op, double x) {
  const std::size_t n = op.size();
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  std::size_t count = 0;
  double q = op.diag[0] - x;
  if (q == 0.0) q = -tiny;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    q = op.diag[i] - x - op.off[i - 1] * op.off[i - 1] / q;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

double tridiag_eigenvalue(const SymTridiag& op, std::size_t k) {
  check_op(op);
  const std::size_t n = op.size();
  if (k >= n) throw Error(Errc::invalid_argument, "eigenvalue index out of range");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(op.off[i - 1]);
    if (i + 1 < n) r += std::abs(op.off[i]);
    lo = std::min(lo, op.diag[i] - r);
    hi = std::max(hi, op.diag[i] + r);
  }
  const double pad = 1e-12 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
  lo -= pad;
  hi += pad;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(op, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> tridiag_eigenvector(const SymTridiag& op, double lambda, double dx) {
  check_op(op);
  const std::size_t n = op.size();
  const double tnorm = std::max(op.norm_inf(), 1.0);
  TridiagLU lu(op, lambda);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  double resid = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 12; ++it) {
    lu.solve(v);
    double vmax = 0.0;
    for (double a : v) vmax = std::max(vmax, std::abs(a));
    if (!(vmax > 0.0) || !std::isfinite(vmax)) throw Error(Errc::non_convergence, "inverse iteration failed");
    for (double& a : v) a /= vmax;
    auto av = op.apply(v);
    resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(av[i] - lambda * v[i]));
    if (it >= 1 && resid <= 64.0 * std::numeric_limits<double>::epsilon() * tnorm) break;
  }
  if (!(resid <= 1e-8 * tnorm)) throw Error(Errc::non_convergence, "inverse iteration did not converge");
  std::size_t imax = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  const double sign = v[imax] < 0.0 ? -1.0 : 1.0;
  const double norm = std::sqrt(sum_norm2(v, dx));
  for (double& a : v) a *= sign / norm;
  return v;
}

EigenPair eig_smallest_abs(const SymTridiag& op, double dx) {
  check_op(op);
  const std::size_t n = op.size();
  const std::size_t k = sturm_count(op, 0.0);
  double best = 0.0;
  bool have = false;
  if (k > 0) {
    best = tridiag_eigenvalue(op, k - 1);
    have = true;
  }
  if (k < n) {
    const double up = tridiag_eigenvalue(op, k);
    if (!have || std::abs(up) <= std::abs(best)) best = up;
  }
  return EigenPair{best, tridiag_eigenvector(op, best, dx)};
}

//----------------------------------------------------------------------------------------------

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

std::vector<cplx> fftw_run(std::span<const cplx> f, int sign) {
  const std::size_t n = next_pow2(std::max<std::size_t>(f.size(), 1));
  std::vector<cplx> in(n, cplx{}), out(n);
  std::copy(f.begin(), f.end(), in.begin());
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (cplx& z : out) z *= s;
  return out;
}

}  // namespace

std::vector<cplx> dft(std::span<const cplx> f) { return fftw_run(f, FFTW_FORWARD); }
std::vector<cplx> idft(std::span<const cplx> f) { return fftw_run(f, FFTW_BACKWARD); }

ComplexField dft(const ComplexField& f) { return dft(f, next_pow2(f.size())); }

ComplexField dft(const ComplexField& f, std::size_t padded_n) {
  const std::size_t n = next_pow2(std::max(padded_n, f.size()));
  const double dx = f.grid.dx;
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
  std::vector<cplx> in(n, cplx{});
  for (std::size_t i = 0; i < f.size(); ++i) in[i] = (i % 2 == 0) ? f[i] : -f[i];
  auto raw = dft(std::span<const cplx>(in));
  Grid1D kg(-static_cast<double>(n / 2) * dk, dk, n);
  const double scale = dx * std::sqrt(static_cast<double>(n) / (2.0 * std::numbers::pi));
  ComplexField out(kg);
  for (std::size_t j = 0; j < n; ++j) out[j] = scale * std::polar(1.0, -kg.x(j) * f.grid.x0) * raw[j];
  return out;
}

ComplexField idft(const ComplexField& spectrum, const Grid1D& xgrid) {
  const std::size_t n = spectrum.size();
  const double dk = spectrum.grid.dx;
  std::vector<cplx> in(n);
  for (std::size_t j = 0; j < n; ++j) in[j] = spectrum[j] * std::polar(1.0, spectrum.grid.x(j) * xgrid.x0);
  auto raw = idft(std::span<const cplx>(in));
  const double scale = dk * std::sqrt(static_cast<double>(n) / (2.0 * std::numbers::pi));
  ComplexField out(xgrid);
  const std::size_t m = std::min(xgrid.n, n);
  for (std::size_t i = 0; i < m; ++i) out[i] = scale * ((i % 2 == 0) ? raw[i] : -raw[i]);
  return out;
}

//----------------------------------------------------------------------------------------------

namespace {

SpacetimeField along_t(const SpacetimeField& f, bool second) {
  SpacetimeField out(f.grid);
  const std::size_t nx = f.grid.spatial.n, nt = f.grid.nt;
  for (std::size_t i = 0; i < nx; ++i) {
    if (second)
      d2_strided(f.values.data() + i, out.values.data() + i, nt, nx, f.grid.dt);
    else
      d1_strided(f.values.data() + i, out.values.data() + i, nt, nx, f.grid.dt);
  }
  return out;
}

SpacetimeField along_x(const SpacetimeField& f, bool second) {
  SpacetimeField out(f.grid);
  const std::size_t nx = f.grid.spatial.n, nt = f.grid.nt;
  for (std::size_t j = 0; j < nt; ++j) {
    if (second)
      d2_strided(f.values.data() + j * nx, out.values.data() + j * nx, nx, 1, f.grid.spatial.dx);
    else
      d1_strided(f.values.data() + j * nx, out.values.data() + j * nx, nx, 1, f.grid.spatial.dx);
  }
  return out;
}

}  // namespace

SpacetimeField deriv_t(const SpacetimeField& f) { return along_t(f, false); }
SpacetimeField deriv_x(const SpacetimeField& f) { return along_x(f, false); }
SpacetimeField deriv_tt(const SpacetimeField& f) { return along_t(f, true); }
SpacetimeField deriv_xx(const SpacetimeField& f) { return along_x(f, true); }

SpacetimeField box_op(const SpacetimeField& f, double c) {
  if (f.grid.signature != Signature::minkowski)
    throw Error(Errc::invalid_argument, "box operator needs a minkowski grid");
  if (!(c > 0.0)) throw Error(Errc::invalid_argument, "c must be positive");
  SpacetimeField tt = deriv_tt(f);
  SpacetimeField xx = deriv_xx(f);
  const double ic2 = 1.0 / (c * c);
  for (std::size_t k = 0; k < tt.values.size(); ++k) tt.values[k] = tt.values[k] * ic2 - xx.values[k];
  return tt;
}

Mask dilate(const Mask& m, std::size_t r) {
  Mask out(m.size(), false);
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!m[i]) continue;
    const std::size_t lo = i >= r ? i - r : 0;
    const std::size_t hi = std::min(n - 1, i + r);
    for (std::size_t j = lo; j <= hi; ++j) out[j] = true;
  }
  return out;
}

}  // namespace qlab
