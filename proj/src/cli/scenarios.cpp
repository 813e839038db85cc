#include "qlab/cli/scenarios.hpp"

#include <cmath>

namespace qlab::cli {

const std::vector<std::string>& test_state_names() {
  static const std::vector<std::string> names{"gaussian", "boosted", "chirped", "ho_mix", "sech"};
  return names;
}

WaveFunction make_test_state(const std::string& name, const Grid1D& g, const PhysicalParams& p) {
  if (name == "gaussian") return gaussian_packet(0.0, 1.0, 0.0, p, g);
  if (name == "boosted") return gaussian_packet(0.5, 0.8, 1.5, p, g);
  if (name == "chirped") {
    WaveFunction w = gaussian_packet(0.0, 1.0, 0.0, p, g);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.x(i);
      w.field[i] *= std::polar(1.0, 0.25 * x * x / p.hbar);
    }
    return w;
  }
  if (name == "ho_mix") {
    WaveFunction a = stationary_ho(0, 1.0, p, g);
    WaveFunction b = stationary_ho(1, 1.0, p, g);
    ComplexField f(g);
    for (std::size_t i = 0; i < g.n; ++i) f[i] = a.field[i] + cplx(0.0, 0.6) * b.field[i];
    return WaveFunction(std::move(f), p).normalized();
  }
  if (name == "sech") {
    ComplexField f = ComplexField::sample(
        g, [](double x) { return std::polar(1.0 / (std::cosh(x) * std::sqrt(2.0)), 0.7 * x); });
    return WaveFunction(std::move(f), p).normalized();
  }
  throw Error(Errc::invalid_argument, "unknown state '" + name + "'");
}

PhysicalParams params_from(const ScenarioConfig& cfg) {
  const PhysicalParams p(cfg.num("hbar"), cfg.num("m"), cfg.num("c"));
  if (!(p.hbar > 0.0) || !(p.m > 0.0) || !(p.c > 0.0)) throw ConfigError("hbar, m and c must be positive");
  return p;
}

Grid1D grid_from(const ScenarioConfig& cfg) {
  const double dx = cfg.num("dx");
  const std::size_t n = cfg.count("n");
  if (!(dx > 0.0)) throw ConfigError("key 'dx' must be positive");
  if (n < 8) throw ConfigError("key 'n' must be at least 8");
  return Grid1D(cfg.num("x0"), dx, n);
}

WaveFunction initial_state(const ScenarioConfig& cfg, const Grid1D& g) {
  const PhysicalParams p = params_from(cfg);
  const std::string& s = cfg.str("scenario");
  if (s == "harmonic") return stationary_ho(static_cast<int>(cfg.integer("level")), cfg.num("omega"), p, g);
  if (s == "free_superposition") return free_superposition(cfg.num("k"), cfg.num("A"), 0.0, p, g);
  if (s == "gaussian_packet") return gaussian_packet(cfg.num("xc"), cfg.num("sigma"), cfg.num("k0"), p, g);
  if (s == "plane_wave") {
    WaveFunction w = plane_wave(cfg.num("k"), 0.0, p, g);
    for (cplx& z : w.field.values) z *= cfg.num("A");
    return w;
  }
  if (s == "custom_csv") throw ConfigError("scenario custom_csv only provides a Q profile for the invert command");
  throw ConfigError("unknown scenario '" + s + "'");
}

Potential potential_from(const ScenarioConfig& cfg, const Grid1D& g) {
  std::string kind = cfg.str("potential");
  if (kind == "auto") kind = cfg.str("scenario") == "harmonic" ? "harmonic" : "zero";
  if (kind == "zero") return zero_potential(g);
  if (kind == "harmonic") return harmonic_potential(g, cfg.num("omega"), params_from(cfg));
  throw ConfigError("unknown potential '" + kind + "'");
}

SpacetimeField travelling_gaussian(std::size_t nx, std::size_t nt) {
  const Grid1D s = Grid1D::span(-6.0, 6.0, nx);
  const double dt = 2.0 / static_cast<double>(nt - 1);
  const SpacetimeGrid g(s, 0.0, dt, nt, Signature::minkowski);
  return SpacetimeField::sample(g, [](double t, double x) {
    const double w = std::sqrt(1.0 + 0.25 * t * t);
    const double d = x - 0.5 * t;
    return std::exp(-0.5 * d * d / (w * w)) / w;
  });
}

}  // namespace qlab::cli
